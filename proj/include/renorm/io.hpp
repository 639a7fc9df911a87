// io.hpp -- JSON (de)serialization of the core data and the plain-text
// report writers. All floating-point output goes through fmt() so repeated
// runs produce byte-identical files.
#pragma once

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "renorm/affine.hpp"
#include "renorm/giet.hpp"

namespace renorm {

using Json = nlohmann::json;

inline Json toJson(const Permutation& p) {
    Json j;
    j["alphabet"] = p.alphabet();
    j["pi0"] = p.pi0();
    j["pi1"] = p.pi1();
    return j;
}

inline Permutation permutationFromJson(const Json& j) {
    std::vector<std::string> alphabet = j.value("alphabet", std::vector<std::string>{});
    return Permutation(j.at("pi0").get<std::vector<int>>(),
                       j.at("pi1").get<std::vector<int>>(), alphabet);
}

inline Json toJson(const Aiet& s) {
    Json j;
    j["perm"] = toJson(s.perm);
    j["lambda"] = s.lambda;
    j["omega"] = s.omega;
    return j;
}

inline Aiet aietFromJson(const Json& j) {
    return Aiet(permutationFromJson(j.at("perm")), j.at("lambda").get<Vec>(),
                j.at("omega").get<Vec>());
}

// branch profile descriptors: {"kind":"affine"} | {"kind":"nonlin","s":..} |
// {"kind":"loglinear","p":..,"q":..} | {"kind":"sine","beta":..}
inline Json profileToJson(const UnitMap& m) {
    Json j;
    if (isIdentity(m)) {
        j["kind"] = "affine";
    } else if (auto* nl = dynamic_cast<const NonlinMap*>(&m)) {
        j["kind"] = "nonlin";
        j["s"] = nl->parameter();
    } else if (auto* ll = dynamic_cast<const LogLinearMap*>(&m)) {
        j["kind"] = "loglinear";
        j["p"] = ll->leftLog();
        j["q"] = ll->rightLog();
    } else {
        throw std::invalid_argument("profile kind has no serialization");
    }
    return j;
}

inline UnitMapPtr profileFromJson(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine") return identityMap();
    if (kind == "nonlin") return nonlinMap(j.at("s").get<double>());
    if (kind == "loglinear")
        return logLinearMap(j.at("p").get<double>(), j.at("q").get<double>());
    if (kind == "sine") return sineWarp(j.at("beta").get<double>());
    throw std::invalid_argument("unknown profile kind: " + kind);
}

inline Json toJson(const Giet& f) {
    Json j;
    j["perm"] = toJson(f.perm());
    j["u"] = f.domainLengths();
    j["w"] = f.imageLengths();
    Json branches = Json::array();
    for (const auto& p : f.profiles()) branches.push_back(profileToJson(*p));
    j["branches"] = branches;
    return j;
}

inline Giet gietFromJson(const Json& j) {
    Permutation p = permutationFromJson(j.at("perm"));
    Vec u = j.at("u").get<Vec>();
    Vec w = j.at("w").get<Vec>();
    std::vector<UnitMapPtr> prof;
    for (const auto& bj : j.at("branches")) prof.push_back(profileFromJson(bj));
    return Giet(p, u, w, std::move(prof));
}

// one JSON line per Zorich step: {epsilon, z, B (integer rows), lambda}
inline std::string inductionToJsonl(const InductionLog& log) {
    std::ostringstream out;
    for (int m = 0; m < log.zorichSize(); ++m) {
        CocycleWindow w = cocycleWindow(log, m, m + 1);
        Json j;
        j["epsilon"] = log.steps[log.zorichBegin(m)].epsilon;
        j["z"] = log.zorichTime(m);
        Json rows = Json::array();
        for (std::size_t i = 0; i < w.matrix.rows(); ++i) {
            Json row = Json::array();
            for (std::size_t c = 0; c < w.matrix.cols(); ++c)
                row.push_back(w.matrix(i, c).convert_to<long long>());
            rows.push_back(row);
        }
        j["B"] = rows;
        Json lam = Json::array();
        for (double x : log.lengthTrace[log.zorichEnd(m) - 1]) lam.push_back(fmt(x));
        j["lambda"] = lam;
        out << j.dump() << "\n";
    }
    return out.str();
}

// minimal CSV writer with deterministic formatting
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            body_ += columns_[i] + (i + 1 < columns_.size() ? "," : "\n");
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i < cells.size()) body_ += cells[i];
            body_ += i + 1 < columns_.size() ? "," : "\n";
        }
    }

    void footer(const Json& j) { body_ += "# " + j.dump() + "\n"; }

    const std::string& str() const { return body_; }

    void writeTo(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << body_;
    }

private:
    std::vector<std::string> columns_;
    std::string body_;
};

inline std::string cell(double x) { return fmt(x); }
inline std::string cell(int x) { return std::to_string(x); }

inline void writeText(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline Json splittingToJson(const SplittingEstimate& est) {
    Json j;
    j["at"] = est.at;
    auto basis = [](const std::vector<Vec>& vs) {
        Json out = Json::array();
        for (const auto& v : vs) out.push_back(v);
        return out;
    };
    j["basisS"] = basis(est.basisS);
    j["basisC"] = basis(est.basisC);
    j["basisU"] = basis(est.basisU);
    j["exponents"] = est.exponents;
    j["fitResidual"] = est.fitResidual;
    j["instability"] = est.instability;
    j["conditionNumber"] = est.conditionNumber;
    j["isoCondition"] = est.isoCondition;
    return j;
}

}  // namespace renorm
