#pragma once

#include "ferri/mumagnon.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <stdexcept>

namespace ferri {

inline nlohmann::json signature_to_json(const StructureKey& key) {
    nlohmann::json j;
    j["parity"] = key.starts_small ? "small-first" : "large-first";
    auto& arr = j["m"] = nlohmann::json::array();
    for (int t : key.twice_values) arr.push_back(HalfInt::from_twice(t).str());
    return j;
}

inline StructureKey signature_from_json(const nlohmann::json& j) {
    StructureKey key;
    const std::string parity = j.at("parity").get<std::string>();
    if (parity == "small-first") key.starts_small = true;
    else if (parity == "large-first") key.starts_small = false;
    else throw std::runtime_error("unknown signature parity: " + parity);
    for (const auto& v : j.at("m")) key.twice_values.push_back(HalfInt::parse(v.get<std::string>()).twice());
    return key;
}

inline nlohmann::json dictionary_to_json(const StructureDictionary& dict) {
    nlohmann::json j;
    j["format"] = "ferrichain-dictionary";
    j["version"] = 1;
    j["provenance"] = {{"n_sites", dict.provenance.n_sites}, {"spins", dict.provenance.spins},
                       {"boundary", dict.provenance.boundary}, {"J", dict.provenance.coupling},
                       {"B", dict.provenance.field},          {"M", dict.provenance.sector},
                       {"energy", dict.provenance.energy}};
    j["max_structure_length"] = dict.max_structure_len;
    j["max_pair_gap"] = dict.max_pair_gap;
    j["far_gap"] = dict.far_gap;
    auto& singles = j["singles"] = nlohmann::json::array();
    for (const auto& [key, alpha] : dict.singles) {
        nlohmann::json entry;
        entry["signature"] = signature_to_json(key);
        entry["alpha_r"] = alpha;
        singles.push_back(std::move(entry));
    }
    auto& pairs = j["pairs"] = nlohmann::json::array();
    for (const auto& [key, beta] : dict.pairs) {
        nlohmann::json entry;
        entry["first"] = signature_to_json(std::get<0>(key));
        entry["second"] = signature_to_json(std::get<1>(key));
        entry["gap"] = std::get<2>(key);
        entry["beta"] = beta;
        pairs.push_back(std::move(entry));
    }
    return j;
}

inline StructureDictionary dictionary_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "ferrichain-dictionary")
        throw std::runtime_error("not a ferrichain dictionary document");
    StructureDictionary dict;
    const auto& prov = j.at("provenance");
    dict.provenance.n_sites = prov.at("n_sites").get<int>();
    dict.provenance.spins = prov.at("spins").get<std::string>();
    dict.provenance.boundary = prov.at("boundary").get<std::string>();
    dict.provenance.coupling = prov.at("J").get<double>();
    dict.provenance.field = prov.at("B").get<double>();
    dict.provenance.sector = prov.at("M").get<std::string>();
    dict.provenance.energy = prov.at("energy").get<double>();
    dict.max_structure_len = j.at("max_structure_length").get<int>();
    dict.max_pair_gap = j.at("max_pair_gap").get<int>();
    dict.far_gap = j.at("far_gap").get<int>();
    for (const auto& entry : j.at("singles"))
        dict.singles[signature_from_json(entry.at("signature"))] = entry.at("alpha_r").get<double>();
    for (const auto& entry : j.at("pairs"))
        dict.pairs[{signature_from_json(entry.at("first")), signature_from_json(entry.at("second")),
                    entry.at("gap").get<int>()}] = entry.at("beta").get<double>();
    return dict;
}

inline void write_dictionary(std::ostream& os, const StructureDictionary& dict) {
    os << dictionary_to_json(dict).dump(2) << '\n';
}

inline StructureDictionary read_dictionary(std::istream& is) {
    nlohmann::json j;
    is >> j;
    return dictionary_from_json(j);
}

} // namespace ferri
