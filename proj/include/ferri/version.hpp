#pragma once

#define FERRI_VERSION "0.1.0"
