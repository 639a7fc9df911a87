// pipeline.hpp -- experiment orchestration: configuration, the full rigidity
// pipeline (induction, splitting, exponential-closeness check, shadow
// extraction, affine model, conjugacy construction and verification, circle
// diagnostics), and deterministic report emission.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "renorm/circle.hpp"
#include "renorm/io.hpp"
#include "renorm/quad.hpp"
#include "renorm/shadow.hpp"

namespace renorm {

struct Tolerances {
    double conjResidual = 1e-5;
    double cohomResidual = 1e-6;
    double minR2 = 0.9;
    double omegaGap = 1e-6;
    double sigmaGap = 1e-8;
    double condLimit = 1e8;

    Json toJson() const {
        Json j;
        j["conjResidual"] = conjResidual;
        j["cohomResidual"] = cohomResidual;
        j["minR2"] = minR2;
        j["omegaGap"] = omegaGap;
        j["sigmaGap"] = sigmaGap;
        j["condLimit"] = condLimit;
        return j;
    }
};

struct ExperimentConfig {
    Giet f;
    std::optional<Giet> g;
    std::string referenceBuiltin;  // "golden2" | "golden3" | "" (use lambda/perm)
    Vec referenceLambda;
    std::optional<Permutation> referencePerm;
    int depth = 10;        // accelerated levels
    int grid = 96;
    std::uint64_t seed = 1;
    std::string mode = "giet";  // or "circle"
    std::string outDir;
    long long heightCap = 10'000'000;
    Tolerances tol;
    std::string rawJson;   // canonical text for hashing

    static ExperimentConfig fromJson(const Json& j) {
        ExperimentConfig cfg;
        cfg.f = gietFromJson(j.at("f"));
        if (j.contains("g")) cfg.g = gietFromJson(j.at("g"));
        if (j.contains("reference")) {
            const Json& r = j.at("reference");
            if (r.contains("builtin")) {
                cfg.referenceBuiltin = r.at("builtin").get<std::string>();
            } else {
                cfg.referenceLambda = r.at("lambda").get<Vec>();
                cfg.referencePerm = permutationFromJson(r.at("perm"));
            }
        } else {
            cfg.referenceBuiltin = "self";
        }
        cfg.depth = j.value("depth", 10);
        cfg.grid = j.value("grid", 96);
        cfg.seed = j.value("seed", std::uint64_t{1});
        cfg.mode = j.value("mode", std::string{"giet"});
        cfg.outDir = j.value("out", std::string{});
        cfg.heightCap = j.value("heightCap", 10'000'000LL);
        if (j.contains("tolerances")) {
            const Json& t = j.at("tolerances");
            cfg.tol.conjResidual = t.value("conjResidual", cfg.tol.conjResidual);
            cfg.tol.cohomResidual = t.value("cohomResidual", cfg.tol.cohomResidual);
            cfg.tol.minR2 = t.value("minR2", cfg.tol.minR2);
            cfg.tol.omegaGap = t.value("omegaGap", cfg.tol.omegaGap);
            cfg.tol.sigmaGap = t.value("sigmaGap", cfg.tol.sigmaGap);
            cfg.tol.condLimit = t.value("condLimit", cfg.tol.condLimit);
        }
        cfg.rawJson = j.dump();
        return cfg;
    }

    std::uint64_t hash() const { return fnv1a(rawJson); }
};

// reference induction, recorded deep enough for `levels` schedule marks plus
// the backward-depth margin the splittings need
struct ReferenceData {
    InductionLog log;
    Schedule sched;
};

inline ReferenceData buildReference(const ExperimentConfig& cfg, int extraLevels = 8) {
    ReferenceData ref;
    int want = cfg.depth + extraLevels;
    // self-similar built-ins: exactly periodic paths of minimal-growth
    // positive loops, valid to arbitrary depth
    if (cfg.referenceBuiltin == "golden2" || cfg.referenceBuiltin == "golden3") {
        Permutation base = cfg.referenceBuiltin == "golden2"
                               ? Permutation::fromMonodromy({2, 1})
                               : Permutation::fromMonodromy({2, 3, 1});
        PeriodicReference per = findPeriodicReference(base);
        for (int reps = 4 * want;; reps *= 2) {
            ref.log = periodicLog(per, reps);
            ref.sched = accelerate(ref.log, per.loop);
            if (ref.sched.levels() >= want || reps > 512 * want) return ref;
        }
    }
    for (int zorich = std::max(40, 6 * want); zorich <= 4096 * want; zorich *= 2) {
        if (cfg.referenceBuiltin == "self" || cfg.referenceLambda.empty()) {
            std::vector<long double> lam(cfg.f.domainLengths().begin(),
                                         cfg.f.domainLengths().end());
            ref.log = recordZorichSteps(BasicIet<long double>(lam, cfg.f.perm()), zorich,
                                        1e-15);
        } else {
            std::vector<long double> lam(cfg.referenceLambda.begin(),
                                         cfg.referenceLambda.end());
            ref.log = recordZorichSteps(BasicIet<long double>(lam, *cfg.referencePerm),
                                        zorich, 1e-15);
        }
        try {
            ref.sched = accelerate(ref.log);
        } catch (const GammaNotFound&) {
            continue;
        }
        if (ref.sched.levels() >= want) return ref;
    }
    if (ref.sched.levels() < 2)
        throw std::runtime_error("reference path too short for any acceleration level");
    return ref;
}

struct PipelineResult {
    int levels = 0;                 // accelerated levels actually analyzed
    EcReport ec;
    PseudoOrbitSeries pseudo;
    ShadowDiagnostics shadow;
    std::optional<ShadowDiagnostics> shadowG;
    Aiet model;
    IntervalGapSeries gaps;
    RatioLimit ratios;
    Vec dC1Series;                  // per accelerated level
    DecayFit dC1Fit;
    double towerMesh = 0;
    double supRatio = 0, infRatio = 0;
    double cohomResidual = 0;
    ConjugacyDerivative dh;
    double omegaPairGap = 0;        // |omega_f - omega_g|_inf for two-map runs
    // circle mode
    std::optional<StableAdjustment> adjustment;
    double adjustedSigmaGap = 0;    // |sigma - 1| at the marked endpoint
    std::optional<BreakEquivalenceReport> breakReport;

    std::map<std::string, bool> criteria;
    std::string csv;
    Json summary;
};

namespace detail {
inline std::string cellOrEmpty(const Vec& v, int idx) {
    return idx >= 0 && idx < static_cast<int>(v.size()) ? fmt(v[idx]) : std::string{};
}
}  // namespace detail

inline PipelineResult runPipeline(const ExperimentConfig& cfg) {
    PipelineResult out;
    ReferenceData ref = buildReference(cfg);
    const InductionLog& log = ref.log;
    const Schedule& sched = ref.sched;

    int N = std::min(cfg.depth, sched.levels() - 2);
    RenormOptions ropt;
    ropt.zorichDepth = sched.zorichIndex[N];
    ropt.heightCap = cfg.heightCap;
    ropt.referencePath = &log;

    RenormState stF(cfg.f, ropt);
    AcceleratedLevels accF = accelerated(stF, sched);
    N = std::min(N, accF.levels());
    out.levels = N;

    ShadowOptions sopt;
    sopt.splitDepth = std::min(10, sched.levels() - N);
    sopt.condLimit = cfg.tol.condLimit;
    auto splits = splittingSeries(log, sched, N, sopt);

    out.pseudo = pseudoOrbitResiduals(accF);
    out.shadow = extractOmega(accF, log, sched, splits, sopt);

    // two-map runs: same diagnostics for g, then compare kernel parts
    std::optional<RenormState> stG;
    if (cfg.g) {
        stG.emplace(*cfg.g, ropt);
        AcceleratedLevels accG = accelerated(*stG, sched);
        out.shadowG = extractOmega(accG, log, sched, splits, sopt);
        out.omegaPairGap = normInf(out.shadow.omegaKernel - out.shadowG->omegaKernel);
    }

    // Affine model: any central-stable representative with the extracted
    // kernel projection will do, and the lift through the backward frames
    // carries far less unstable noise than the raw pullback, so the model
    // slope is re-lifted from omega_f. Lengths come from the nested cones,
    // normalized to the f total.
    Vec modelOmega;
    {
        auto trans = heightTransitions(log, sched);
        auto sing0 = singularityStructure(log.startPerm);
        int liftDepth = std::min<int>(static_cast<int>(trans.size()), N + sopt.splitDepth);
        modelOmega = centralStableLift(trans, liftDepth, sing0.kernelBasis,
                                       out.shadow.omegaKernel);
    }
    auto modelRes = constructAffineModel(log, sched, modelOmega, sched.levels());
    Vec lam = modelRes.model.lambda;
    double tot = 0;
    for (double x : lam) tot += x;
    for (auto& x : lam) x *= cfg.f.total() / tot;
    out.model = Aiet(log.startPerm, closeLengths(lam, modelOmega), modelOmega);
    Giet modelGiet = out.model.toGiet();

    RenormState stS(modelGiet, ropt);
    AcceleratedLevels accS = accelerated(stS, sched);
    int Ncommon = std::min(N, accS.levels());

    out.gaps = intervalRatioReport(accF, accS);
    out.ratios = ratioLimit(accF, accS);

    // per-level grid diagnostics, one sampling pass per branch: the zoomed
    // branch samples give the identity distance, the distortion (through the
    // log of the derivative samples) and, since the model side zooms to the
    // identity, the C1 distance against the model. Deep levels use a coarser
    // grid (halved per level below the configured base, floor of 8): the
    // sampled quantities decay geometrically, so the sup estimate stays far
    // more accurate than the decay being measured.
    auto gridAt = [&](int n) { return std::max(8, cfg.grid >> std::max(0, n - 3)); };
    out.dC1Series.push_back(dC1(stF, stS, 0, cfg.grid));
    for (int n = 1; n <= N; ++n) {
        const LevelData& lf = accF.level(n);
        double e1 = 0, dist = 0, dC1v = 0;
        bool common = n <= Ncommon;
        const LevelData* ls = common ? &accS.level(n) : nullptr;
        int grid = gridAt(n);
        for (int alpha = 0; alpha < cfg.f.d(); ++alpha) {
            auto sf = stF.sampleZoomedBranch(sched.zorichIndex[n], alpha, grid);
            double dv = 0, dd = 0, lmin = 0, lmax = 0;
            int denom = std::max(grid, 1);
            for (int i = 0; i <= grid; ++i) {
                double t = static_cast<double>(i) / denom;
                dv = std::max(dv, std::abs(sf.value[i] - t));
                dd = std::max(dd, std::abs(sf.deriv[i] - 1.0));
                double l = std::log(sf.deriv[i]);
                if (i == 0) {
                    lmin = lmax = l;
                } else {
                    lmin = std::min(lmin, l);
                    lmax = std::max(lmax, l);
                }
            }
            e1 = std::max(e1, dv + dd);
            dist = std::max(dist, std::expm1(lmax - lmin));
            if (common) {
                double term = dv + dd + std::abs(lf.u[alpha] / lf.total - ls->u[alpha] / ls->total) +
                              std::abs(lf.w[alpha] / lf.total - ls->w[alpha] / ls->total);
                dC1v = std::max(dC1v, term);
            }
        }
        Vec Ln = lf.avgLogSlope();
        auto dec = splits[n - 1].decompose(Ln);
        out.ec.level.push_back(n);
        out.ec.e1.push_back(e1);
        out.ec.e2.push_back(norm2(dec.unstable));
        out.ec.e3.push_back(norm2(dec.stable));
        out.ec.distortionSeries.push_back(dist);
        if (common) out.dC1Series.push_back(dC1v);
    }
    {
        Vec ns(out.ec.level.begin(), out.ec.level.end());
        out.ec.e1Fit = fitDecay(ns, out.ec.e1, 1e-14);
        out.ec.e2Fit = fitDecay(ns, out.ec.e2, 1e-14);
        out.ec.e3Fit = fitDecay(ns, out.ec.e3, 1e-14);
        out.ec.distortionFit = fitDecay(ns, out.ec.distortionSeries, 1e-14);
        Vec nd;
        for (std::size_t i = 0; i < out.dC1Series.size(); ++i)
            nd.push_back(static_cast<double>(i));
        out.dC1Fit = fitDecay(nd, out.dC1Series, 1e-14);
    }

    // conjugacy at the deepest common level whose tower still fits in memory
    int towerLevel = sched.zorichIndex[Ncommon];
    towerLevel = std::min({towerLevel, stF.levels(), stS.levels()});
    while (towerLevel > 1) {
        long long floors = 0;
        for (long long q : stF.level(towerLevel).heights) floors += q;
        if (floors <= 4'000'000) break;
        --towerLevel;
    }
    TowerPartition tf = towers(stF, towerLevel);
    out.towerMesh = tf.mesh;
    SemiConjugacy h = buildSemiConjugacy(stF, stS, towerLevel);
    out.supRatio = h.supRatio();
    out.infRatio = h.infRatio();

    const Giet& fMap = stF.base();
    Observable phi = [&](double x) { return modelGiet.logDeriv(h(x)) - fMap.logDeriv(x); };
    PotentialSolution psi = solveCohomological(stF, phi, towerLevel);
    out.cohomResidual = cohomologicalResidual(stF, phi, psi, 10000);
    out.dh = conjugacyDerivative(stF, stS, h, psi, 10000);

    if (cfg.mode == "circle") {
        out.adjustment = stableAdjustment(log.startLengths, log.startPerm, out.shadow.omega);
        const auto& adj = *out.adjustment;
        int cut = log.startPerm.d() - *log.startPerm.rotationShift() - 1;
        int leftSym = log.startPerm.symbolAtTop(cut);
        int rightSym = log.startPerm.symbolAtTop(cut + 1);
        out.adjustedSigmaGap =
            std::abs(std::exp(adj.adjusted[leftSym] - adj.adjusted[rightSym]) - 1.0);
        if (cfg.g && stG) {
            int lv = std::min({towerLevel, stG->levels()});
            SemiConjugacy hfg = buildSemiConjugacy(stF, *stG, lv);
            out.breakReport = breakEquivalent(CircleMap(cfg.f), CircleMap(*cfg.g), hfg,
                                              20 * towers(stF, lv).mesh);
        }
    }

    // pass/fail summary; a series resting at rounding level counts as
    // (vacuously) decayed
    auto fitOk = [&](const DecayFit& fit, const Vec& series) {
        double mx = 0;
        for (double v : series) mx = std::max(mx, std::abs(v));
        if (mx < 1e-8) return true;
        return fit.points >= 3 && fit.rate < 1.0 && fit.r2 >= cfg.tol.minR2;
    };
    out.criteria["ec_e1_decay"] = fitOk(out.ec.e1Fit, out.ec.e1);
    out.criteria["ec_e2_decay"] = fitOk(out.ec.e2Fit, out.ec.e2);
    out.criteria["ec_e3_decay"] = fitOk(out.ec.e3Fit, out.ec.e3);
    out.criteria["distortion_decay"] = fitOk(out.ec.distortionFit, out.ec.distortionSeries);
    out.criteria["pseudo_orbit_decay"] =
        fitOk(out.pseudo.fit, out.pseudo.residual) && !out.pseudo.flagged;
    out.criteria["interval_gap_decay"] = fitOk(out.gaps.intervalFit, out.gaps.intervalGap);
    out.criteria["image_gap_decay"] = fitOk(out.gaps.imageFit, out.gaps.imageGap);
    out.criteria["dC1_decay"] = fitOk(out.dC1Fit, out.dC1Series);
    out.criteria["cohomological_residual"] = out.cohomResidual <= cfg.tol.cohomResidual;
    out.criteria["conjugacy_residual"] = out.dh.conjResidual <= cfg.tol.conjResidual;
    if (cfg.g) out.criteria["same_model"] = out.omegaPairGap <= cfg.tol.omegaGap;
    if (cfg.mode == "circle") {
        out.criteria["stable_adjustment"] = out.adjustedSigmaGap <= cfg.tol.sigmaGap;
        if (out.breakReport) out.criteria["break_equivalence"] = out.breakReport->equivalent;
    }

    // ---- reports ----
    CsvWriter csv({"n", "e1", "e2", "e3", "distortion", "r_n", "shadow_err", "interval_gap",
                   "image_gap", "d_p", "dC1", "cohom_residual", "conj_residual", "dh_gap"});
    for (int n = 0; n <= N; ++n) {
        std::vector<std::string> row;
        row.push_back(cell(n));
        int ecIdx = n - 1;  // ec series start at level 1
        row.push_back(detail::cellOrEmpty(out.ec.e1, ecIdx));
        row.push_back(detail::cellOrEmpty(out.ec.e2, ecIdx));
        row.push_back(detail::cellOrEmpty(out.ec.e3, ecIdx));
        row.push_back(detail::cellOrEmpty(out.ec.distortionSeries, ecIdx));
        row.push_back(detail::cellOrEmpty(out.pseudo.residual, n));
        row.push_back(detail::cellOrEmpty(out.shadow.shadowError, ecIdx));
        row.push_back(detail::cellOrEmpty(out.gaps.intervalGap, n));
        row.push_back(detail::cellOrEmpty(out.gaps.imageGap, n));
        row.push_back(detail::cellOrEmpty(out.gaps.projective, n));
        row.push_back(detail::cellOrEmpty(out.dC1Series, n));
        if (n == N) {
            row.push_back(cell(out.cohomResidual));
            row.push_back(cell(out.dh.conjResidual));
            row.push_back(cell(out.dh.dhGap));
        }
        csv.row(row);
    }
    Json footer;
    footer["config_hash"] = fmt(static_cast<double>(cfg.hash()));
    footer["tolerances"] = cfg.tol.toJson();
    footer["grid_base"] = cfg.grid;
    footer["grid_rule"] = "max(8, grid >> max(0, n-3))";
    footer["rates"] = {{"e1", out.ec.e1Fit.rate},       {"e2", out.ec.e2Fit.rate},
                       {"e3", out.ec.e3Fit.rate},       {"distortion", out.ec.distortionFit.rate},
                       {"r_n", out.pseudo.fit.rate},    {"interval", out.gaps.intervalFit.rate},
                       {"image", out.gaps.imageFit.rate}, {"dC1", out.dC1Fit.rate}};
    footer["r2"] = {{"e1", out.ec.e1Fit.r2},
                    {"dC1", out.dC1Fit.r2},
                    {"interval", out.gaps.intervalFit.r2}};
    footer["omega"] = out.shadow.omega;
    footer["omega_kernel"] = out.shadow.omegaKernel;
    footer["ratio_constant"] = out.ratios.constant;
    footer["C"] = out.dh.C;
    footer["tower_mesh"] = out.towerMesh;
    footer["sup_ratio"] = out.supRatio;
    footer["inf_ratio"] = out.infRatio;
    Json pass;
    for (const auto& [k, v] : out.criteria) pass[k] = v;
    footer["pass"] = pass;
    if (cfg.g) footer["omega_pair_gap"] = out.omegaPairGap;
    if (out.adjustment) {
        footer["adjusted_sigma_gap"] = out.adjustedSigmaGap;
        footer["adjustment_a"] = out.adjustment->a;
        footer["adjustment_t"] = out.adjustment->t;
    }
    csv.footer(footer);
    out.csv = csv.str();
    out.summary = footer;

    if (!cfg.outDir.empty()) {
        std::filesystem::create_directories(cfg.outDir);
        csv.writeTo(cfg.outDir + "/pipeline.csv");
        Json conjReport;
        conjReport["resolution"] = out.towerMesh;
        conjReport["sup_ratio"] = out.supRatio;
        conjReport["inf_ratio"] = out.infRatio;
        conjReport["cohom_residual"] = out.cohomResidual;
        conjReport["conj_residual"] = out.dh.conjResidual;
        conjReport["dh_gap"] = out.dh.dhGap;
        conjReport["C"] = out.dh.C;
        writeText(cfg.outDir + "/conjugacy.json", conjReport.dump(2) + "\n");
        writeText(cfg.outDir + "/summary.json", footer.dump(2) + "\n");
        writeText(cfg.outDir + "/model.json", toJson(out.model).dump(2) + "\n");
    }
    return out;
}

// seeded generator for property suites: random zero-mean maps over a
// rotation-type permutation
inline Giet randomPipelineInput(Rng& rng, int d) {
    std::vector<int> mono(d);
    for (int i = 1; i <= d; ++i) mono[i - 1] = i % d + 1;
    Permutation p = Permutation::fromMonodromy(mono);
    return randomZeroMeanGiet(rng, p);
}

}  // namespace renorm
