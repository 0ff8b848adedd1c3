#include "json.hpp"
#include "tr/analysis/analysis.hpp"

namespace tr::analysis {

using nlohmann::json;

namespace {

PropCondition literals(const json& j, const FeatureSet& f) {
    PropCondition c;
    for (const auto& item : j) {
        std::string s = item.get<std::string>();
        bool negative = !s.empty() && s[0] == '!';
        if (negative) s.erase(0, 1);
        (negative ? c.neg : c.pos) |= 1U << f.index(s);
    }
    if (c.contradictory()) throw AnalysisError(AnalysisErrorKind::InvalidModel, "contradictory precondition");
    return c;
}

std::uint32_t mask(const json& j, const FeatureSet& f) {
    std::uint32_t m = 0;
    for (const auto& item : j) m |= 1U << f.index(item.get<std::string>());
    return m;
}

json names(std::uint32_t m, const FeatureSet& f, const char* prefix = "") {
    json out = json::array();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if ((m >> i) & 1U) out.push_back(prefix + f.names()[i]);
    }
    return out;
}

ActionModel model(const std::string& name, const json& j, const FeatureSet& f) {
    ActionModel m;
    m.name = name;
    m.pre = literals(j.value("pre", json::array()), f);
    m.add = mask(j.value("add", json::array()), f);
    m.del = mask(j.value("del", json::array()), f);
    if (m.add & m.del) {
        throw AnalysisError(AnalysisErrorKind::InvalidModel, "'" + name + "' both adds and deletes a feature");
    }
    return m;
}

}  // namespace

ModelSet models_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw AnalysisError(AnalysisErrorKind::InvalidModel, e.what());
    }
    try {
        ModelSet out;
        out.features = FeatureSet(doc.at("features").get<std::vector<std::string>>());
        for (const auto& [name, spec] : doc.at("actions").items()) {
            auto& list = out.actions[name];
            if (spec.is_array()) {
                for (const auto& m : spec) list.push_back(model(name, m, out.features));
            } else {
                list.push_back(model(name, spec, out.features));
            }
        }
        return out;
    } catch (const json::exception& e) {
        throw AnalysisError(AnalysisErrorKind::InvalidModel, e.what());
    }
}

std::string models_to_json(const ModelSet& models) {
    json doc;
    doc["features"] = models.features.names();
    json actions = json::object();
    for (const auto& [name, list] : models.actions) {
        json arr = json::array();
        for (const auto& m : list) {
            json pre = names(m.pre.pos, models.features);
            for (const auto& n : names(m.pre.neg, models.features, "!")) pre.push_back(n);
            arr.push_back({{"pre", pre}, {"add", names(m.add, models.features)}, {"del", names(m.del, models.features)}});
        }
        actions[name] = arr;
    }
    doc["actions"] = actions;
    return doc.dump(2);
}

}  // namespace tr::analysis
