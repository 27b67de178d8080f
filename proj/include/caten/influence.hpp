// SPDX-License-Identifier: MIT
// Causal influence on tensor networks: the correlation-ratio measure, the
// instrument-normalized operational measure, randomized influence detection,
// and a bridge check equating network influence statistics with intervention
// statistics on the image causal model.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "caten/cm.hpp"
#include "caten/errors.hpp"
#include "caten/graphs.hpp"
#include "caten/linalg.hpp"
#include "caten/map.hpp"
#include "caten/rng.hpp"
#include "caten/tn.hpp"

namespace caten {

struct DenominatorZero : Error {
    using Error::Error;
};
struct InconsistentPair : Error {
    using Error::Error;
};
struct NotSubnormalized : Error {
    using Error::Error;
};
struct AllPairsInconsistent : Error {
    using Error::Error;
};

// Ordered pair of disjoint, non-empty edge subsets: unitaries are inserted on
// `a` and observations (a Hermitian operator or instrument) on `b`.  Operators
// act on the tensor product of the edge spaces in edge-list order.
struct RegionPair {
    std::vector<std::string> a;
    std::vector<std::string> b;
};

// Instrument with Hermitian elements acting on a region's edge space:
// sum_y O_y^dagger O_y = I.  `region` binds the instrument to specific edges;
// an empty region leaves it usable on any region of matching dimension.
struct InstrumentOnRegion {
    std::vector<std::string> region;
    std::vector<std::string> labels;
    std::vector<Eigen::MatrixXcd> kraus;
};

namespace influence_detail {

// Region factors in edge-list order; validates ids exist and are unique.
inline std::vector<Factor> region_space(const UndirectedMultigraph& g,
                                        const std::vector<std::string>& ids,
                                        const char* name) {
    if (ids.empty()) {
        throw Error(std::string("influence: region ") + name + " must not be empty");
    }
    std::set<std::string> want(ids.begin(), ids.end());
    if (want.size() != ids.size()) {
        throw Error(std::string("influence: region ") + name + " has duplicate edges");
    }
    std::vector<Factor> space;
    for (const UndirectedEdge& e : g.edges()) {
        if (want.erase(e.id)) {
            space.push_back({e.id, static_cast<std::size_t>(e.dim)});
        }
    }
    if (!want.empty()) {
        throw Error(std::string("influence: region ") + name + " references unknown edge '" +
                    *want.begin() + "'");
    }
    return space;
}

inline std::pair<std::vector<Factor>, std::vector<Factor>> region_spaces(
    const UndirectedMultigraph& g, const RegionPair& regions) {
    std::vector<Factor> sa = region_space(g, regions.a, "a");
    std::vector<Factor> sb = region_space(g, regions.b, "b");
    for (const Factor& f : sa) {
        for (const Factor& r : sb) {
            if (f.id == r.id) {
                throw Error("influence: regions must be disjoint (edge '" + f.id + "')");
            }
        }
    }
    return {std::move(sa), std::move(sb)};
}

inline SquareOperator region_operator(const std::vector<Factor>& space,
                                      const Eigen::MatrixXcd& m, const char* what) {
    const auto d = static_cast<Eigen::Index>(space_dim(space));
    if (m.rows() != d || m.cols() != d) {
        throw Error(std::string("influence: ") + what + " has the wrong dimension for its region");
    }
    SquareOperator op;
    op.space = space;
    op.matrix = m;
    return op;
}

inline void check_unitary(const Eigen::MatrixXcd& u) {
    if (u.rows() != u.cols()) {
        throw Error("influence: inserted operator on region a is not unitary");
    }
    const Eigen::MatrixXcd g = u.adjoint() * u;
    if ((g - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() >
        kHermTol) {
        throw Error("influence: inserted operator on region a is not unitary");
    }
}

inline void check_instrument(const InstrumentOnRegion& inst, std::size_t dim) {
    if (inst.labels.empty() || inst.labels.size() != inst.kraus.size()) {
        throw Error("influence: instrument needs one Hermitian element per label");
    }
    std::set<std::string> seen(inst.labels.begin(), inst.labels.end());
    if (seen.size() != inst.labels.size()) {
        throw Error("influence: instrument has duplicate labels");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t k = 0; k < inst.kraus.size(); ++k) {
        const Eigen::MatrixXcd& o = inst.kraus[k];
        if (o.rows() != d || o.cols() != d) {
            throw Error("influence: instrument element '" + inst.labels[k] +
                        "' has the wrong dimension for its region");
        }
        if ((o - o.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
            throw Error("influence: instrument element '" + inst.labels[k] +
                        "' is not Hermitian");
        }
        sum += o.adjoint() * o;
    }
    if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > kHermTol) {
        throw Error("influence: instrument elements do not sum to completeness");
    }
}

// A placement restricted to the factors an insertion actually touches (the
// bare denominator insertion spans region a only).
inline CopySelector restrict_selector(const CopySelector& placement,
                                      const std::vector<Factor>& space) {
    CopySelector out;
    for (const Factor& f : space) {
        const auto it = placement.copy.find(f.id);
        if (it != placement.copy.end()) out.copy[f.id] = it->second;
    }
    return out;
}

// <L| Q rho_P Q^dagger |L> for an insertion Q on the selected copies.  The
// total state is positive semidefinite, so the value is real.
inline double insertion_value(const TensorNetwork& tn, const SquareOperator& q,
                              const CopySelector& placement) {
    SquareOperator qdag;
    qdag.space = q.space;
    qdag.matrix = q.matrix.adjoint();
    const std::complex<double> v = correlation(tn, q, qdag, placement);
    if (std::abs(v.imag()) > kImagResidueTol * std::max(1.0, std::abs(v.real()))) {
        throw Error("influence: imaginary residue exceeds tolerance");
    }
    return v.real();
}

// One correlation numerator per instrument element, with the unitary riding
// along on region a.
inline std::vector<double> element_values(const TensorNetwork& tn,
                                          const std::vector<Factor>& space_a,
                                          const std::vector<Factor>& space_b,
                                          const Eigen::MatrixXcd& u,
                                          const InstrumentOnRegion& inst,
                                          const CopySelector& placement) {
    const SquareOperator u_op = region_operator(space_a, u, "unitary");
    std::vector<double> vals;
    vals.reserve(inst.kraus.size());
    for (const Eigen::MatrixXcd& o : inst.kraus) {
        const SquareOperator joint =
            tensor_product(u_op, region_operator(space_b, o, "instrument element"));
        vals.push_back(insertion_value(tn, joint, placement));
    }
    return vals;
}

} // namespace influence_detail

inline InstrumentOnRegion make_region_instrument(std::vector<std::string> region,
                                                 std::vector<std::string> labels,
                                                 std::vector<Eigen::MatrixXcd> kraus) {
    InstrumentOnRegion inst{std::move(region), std::move(labels), std::move(kraus)};
    if (inst.kraus.empty()) {
        throw Error("make_region_instrument: no elements");
    }
    influence_detail::check_instrument(inst, static_cast<std::size_t>(inst.kraus[0].rows()));
    return inst;
}

// Minimal Hermitian completion {O, sqrt(I - O^2)} of a single subnormalized
// Hermitian element, making the one-operator measure comparable with the
// instrument-normalized one.
inline InstrumentOnRegion complete_instrument(const Eigen::MatrixXcd& o) {
    if (o.rows() != o.cols() || (o - o.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
        throw Error("complete_instrument: element is not Hermitian");
    }
    const Eigen::MatrixXcd gap =
        Eigen::MatrixXcd::Identity(o.rows(), o.cols()) - o.adjoint() * o;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gap);
    if (es.eigenvalues().minCoeff() < -kHermTol) {
        throw NotSubnormalized("complete_instrument: I - O^2 is not positive semidefinite");
    }
    const Eigen::MatrixXcd root =
        es.eigenvectors() *
        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
        es.eigenvectors().adjoint();
    return InstrumentOnRegion{{}, {"0", "1"}, {o, root}};
}

// Ratio of correlation functions: the O-dressed insertion over the bare one.
// Both insertions ride on the same doubled-copy placement (default: copy 0 of
// every region edge).
inline double m_chqy(const TensorNetwork& tn, const RegionPair& regions,
                     const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& o,
                     const CopySelector& placement = {}) {
    const auto [space_a, space_b] = influence_detail::region_spaces(tn.graph, regions);
    influence_detail::check_unitary(u);
    const SquareOperator o_op = influence_detail::region_operator(space_b, o, "observable");
    if (!o_op.is_hermitian()) {
        throw Error("m_chqy: observable is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(o.adjoint() * o,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > 1.0 + kHermTol) {
        throw Error("m_chqy: observable exceeds the subnormalization bound");
    }
    const SquareOperator u_op = influence_detail::region_operator(space_a, u, "unitary");
    const double num =
        influence_detail::insertion_value(tn, tensor_product(u_op, o_op), placement);
    const double den = influence_detail::insertion_value(
        tn, u_op, influence_detail::restrict_selector(placement, space_a));
    if (std::abs(den) <= kInconsistencyTol) {
        throw DenominatorZero("m_chqy: bare insertion annihilates the contraction");
    }
    return num / den;
}

// Probability of instrument outcome y, normalized over the whole instrument
// rather than the bare insertion.
inline double m_operational(const TensorNetwork& tn, const RegionPair& regions,
                            const Eigen::MatrixXcd& u, const InstrumentOnRegion& inst,
                            const std::string& y, const CopySelector& placement = {}) {
    const auto [space_a, space_b] = influence_detail::region_spaces(tn.graph, regions);
    influence_detail::check_unitary(u);
    influence_detail::check_instrument(inst, space_dim(space_b));
    if (!inst.region.empty()) {
        std::vector<std::string> bound;
        for (const Factor& f :
             influence_detail::region_space(tn.graph, inst.region, "instrument")) {
            bound.push_back(f.id);
        }
        std::vector<std::string> target;
        for (const Factor& f : space_b) target.push_back(f.id);
        if (bound != target) {
            throw Error("m_operational: instrument is bound to a different region");
        }
    }
    const auto yit = std::find(inst.labels.begin(), inst.labels.end(), y);
    if (yit == inst.labels.end()) {
        throw Error("m_operational: unknown outcome label '" + y + "'");
    }
    const std::vector<double> vals =
        influence_detail::element_values(tn, space_a, space_b, u, inst, placement);
    double den = 0.0;
    for (double v : vals) den += v;
    if (std::abs(den) <= kInconsistencyTol) {
        throw InconsistentPair("m_operational: instrument normalizer vanishes");
    }
    return vals[static_cast<std::size_t>(yit - inst.labels.begin())] / den;
}

// ---------------------------------------------------------------------------
// Randomized influence detection.  The probe families mirror the causal-model
// signalling sampler: deterministic members first (identity, shift, clock;
// the computational readout), then seeded Haar-random ones, so Detected
// witnesses are replayable from the seed.

struct InfluenceSampler {
    std::uint64_t seed = 0;
    std::size_t n_unitaries = 8;   // random unitaries beyond {I, X, Z}
    std::size_t n_instruments = 8; // random readouts beyond the computational one
    double tol = 1e-9;
};

struct InfluenceWitness {
    std::string u, u_prime; // unitary labels whose statistics differ
    std::string instrument; // instrument label
    std::string y;          // outcome where they differ
    double deviation = 0.0;
};

struct InfluenceVerdict {
    bool detected = false;
    InfluenceWitness witness; // meaningful when detected
    std::size_t comparisons = 0;
    std::size_t inconsistent_skipped = 0; // (unitary, instrument) pairs skipped
};

namespace influence_detail {

struct ProbeFamilies {
    std::vector<std::pair<std::string, Eigen::MatrixXcd>> unitaries;
    std::vector<std::pair<std::string, InstrumentOnRegion>> instruments;
};

// Hermitian readout conjugated into a random basis: elements v^dagger P_y v.
inline InstrumentOnRegion rotated_readout(const Eigen::MatrixXcd& v) {
    const Eigen::Index d = v.rows();
    InstrumentOnRegion inst;
    for (Eigen::Index y = 0; y < d; ++y) {
        inst.labels.push_back(std::to_string(y));
        inst.kraus.push_back(v.row(y).adjoint() * v.row(y));
    }
    return inst;
}

inline ProbeFamilies sampled_families(std::size_t d_a, std::size_t d_b,
                                      const InfluenceSampler& sampler) {
    if (sampler.n_unitaries < 1 || sampler.n_instruments < 1) {
        throw Error("influence sampler: budget must be at least one per family");
    }
    ProbeFamilies fam;
    const auto da = static_cast<Eigen::Index>(d_a);
    const auto db = static_cast<Eigen::Index>(d_b);
    fam.unitaries.push_back({"I", Eigen::MatrixXcd::Identity(da, da)});
    if (d_a >= 2) {
        fam.unitaries.push_back({"X", cm_detail::shift_matrix(d_a)});
        fam.unitaries.push_back({"Z", cm_detail::clock_matrix(d_a)});
    }
    for (std::size_t k = 1; k <= sampler.n_unitaries; ++k) {
        Rng rng(mix_seed(sampler.seed, 2 * k));
        fam.unitaries.push_back({"U" + std::to_string(k), rng.haar_unitary(da)});
    }
    fam.instruments.push_back(
        {"comp", rotated_readout(Eigen::MatrixXcd::Identity(db, db))});
    for (std::size_t k = 1; k <= sampler.n_instruments; ++k) {
        Rng rng(mix_seed(sampler.seed, 2 * k + 1));
        fam.instruments.push_back(
            {"V" + std::to_string(k), rotated_readout(rng.haar_unitary(db))});
    }
    return fam;
}

// Outcome distribution of one (unitary, instrument) pair, or nothing when the
// pair is inconsistent.
inline bool pair_distribution(const TensorNetwork& tn,
                              const std::vector<Factor>& space_a,
                              const std::vector<Factor>& space_b,
                              const Eigen::MatrixXcd& u, const InstrumentOnRegion& inst,
                              const CopySelector& placement, std::vector<double>& out) {
    const std::vector<double> vals = element_values(tn, space_a, space_b, u, inst, placement);
    double den = 0.0;
    for (double v : vals) den += v;
    if (std::abs(den) <= kInconsistencyTol) return false;
    out.assign(vals.size(), 0.0);
    for (std::size_t k = 0; k < vals.size(); ++k) out[k] = vals[k] / den;
    return true;
}

} // namespace influence_detail

inline InfluenceVerdict detect_influence(const TensorNetwork& tn, const RegionPair& regions,
                                         const InfluenceSampler& sampler) {
    const auto [space_a, space_b] = influence_detail::region_spaces(tn.graph, regions);
    const influence_detail::ProbeFamilies fam = influence_detail::sampled_families(
        space_dim(space_a), space_dim(space_b), sampler);
    InfluenceVerdict verdict;
    std::size_t total_pairs = 0;
    for (const auto& [b_label, inst] : fam.instruments) {
        std::vector<std::pair<std::string, std::vector<double>>> dists;
        for (const auto& [a_label, u] : fam.unitaries) {
            ++total_pairs;
            std::vector<double> dist;
            if (!influence_detail::pair_distribution(tn, space_a, space_b, u, inst, {},
                                                     dist)) {
                ++verdict.inconsistent_skipped;
                continue;
            }
            dists.push_back({a_label, std::move(dist)});
        }
        for (std::size_t i = 0; i < dists.size(); ++i) {
            for (std::size_t j = i + 1; j < dists.size(); ++j) {
                for (std::size_t y = 0; y < inst.labels.size(); ++y) {
                    ++verdict.comparisons;
                    const double dev = std::abs(dists[i].second[y] - dists[j].second[y]);
                    if (dev > sampler.tol) {
                        verdict.detected = true;
                        verdict.witness = {dists[i].first, dists[j].first, b_label,
                                           inst.labels[y], dev};
                        return verdict;
                    }
                }
            }
        }
    }
    if (verdict.inconsistent_skipped == total_pairs) {
        throw AllPairsInconsistent(
            "detect_influence: every sampled pair had a vanishing normalizer");
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Bridge: the network measure evaluated with insertions on the producer-side
// copies equals the intervention statistics of the image causal model, pair
// by pair.  Inconsistent pairs are reported, never raised.

struct BridgeReport {
    std::size_t samples = 0;          // (unitary, instrument) pairs evaluated
    std::size_t consistent_pairs = 0; // consistent on both sides
    std::size_t tn_inconsistent = 0;
    std::size_t cm_inconsistent = 0;
    std::size_t consistency_mismatches = 0; // flagged on one side only
    double max_deviation = 0.0; // max |M - P(y|a,b)| over mutually consistent pairs
    bool tn_detected = false;   // statistics shift with the unitary, network side
    bool cm_detected = false;   // same question on the causal-model side
    bool verdicts_agree = false;
};

namespace influence_detail {

// Producer-side copy of every region edge under the given orientation: the
// copy named after the edge's tail (a self-loop's out attachment is its
// second copy).
inline CopySelector producer_placement(const UndirectedMultigraph& g,
                                       const DirectedCausalGraph& oriented,
                                       const RegionPair& regions) {
    std::set<std::string> in_region(regions.a.begin(), regions.a.end());
    in_region.insert(regions.b.begin(), regions.b.end());
    CopySelector sel;
    for (std::size_t t = 0; t < g.edges().size(); ++t) {
        const UndirectedEdge& e = g.edges()[t];
        if (!in_region.count(e.id)) continue;
        if (e.u == e.v) {
            sel.copy[e.id] = 1;
        } else {
            const std::string& from = oriented.edges()[t].from;
            sel.copy[e.id] = from == std::min(e.u, e.v) ? 0 : 1;
        }
    }
    return sel;
}

inline bool family_detected(
    const std::vector<std::vector<std::pair<std::size_t, std::vector<double>>>>& dists,
    double tol) {
    for (const auto& per_instrument : dists) {
        for (std::size_t i = 0; i < per_instrument.size(); ++i) {
            for (std::size_t j = i + 1; j < per_instrument.size(); ++j) {
                const auto& p = per_instrument[i].second;
                const auto& q = per_instrument[j].second;
                for (std::size_t y = 0; y < p.size(); ++y) {
                    if (std::abs(p[y] - q[y]) > tol) return true;
                }
            }
        }
    }
    return false;
}

} // namespace influence_detail

inline BridgeReport bridge_check(const TensorNetwork& tn, const std::string& directions,
                                 const RegionPair& regions,
                                 const InfluenceSampler& sampler) {
    const auto [space_a, space_b] = influence_detail::region_spaces(tn.graph, regions);
    const influence_detail::ProbeFamilies fam = influence_detail::sampled_families(
        space_dim(space_a), space_dim(space_b), sampler);
    const GeneralizedMapResult mapped = tn_to_cm_general(tn, directions);
    const CopySelector placement = influence_detail::producer_placement(
        tn.graph, map_detail::oriented_graph(tn.graph, directions), regions);

    // the same probes as channels and instruments on the image model
    std::map<std::string, Superoperator> a_family;
    for (const auto& [label, u] : fam.unitaries) {
        a_family.emplace(label, superoperator_from_kraus({u}, space_a, space_a));
    }
    std::map<std::string, Instrument> b_family;
    for (const auto& [label, inst] : fam.instruments) {
        Instrument cm_inst;
        cm_inst.outcomes = inst.labels;
        for (const Eigen::MatrixXcd& o : inst.kraus) {
            cm_inst.elements.push_back(superoperator_from_kraus({o}, space_b, space_b));
        }
        b_family.emplace(label, std::move(cm_inst));
    }
    InterventionSpec spec = make_intervention_spec(
        mapped.model.graph, regions.a, regions.b, std::move(a_family), std::move(b_family));
    const InterventionSession session(mapped.model, std::move(spec));

    BridgeReport report;
    std::vector<std::vector<std::pair<std::size_t, std::vector<double>>>> tn_dists;
    std::vector<std::vector<std::pair<std::size_t, std::vector<double>>>> cm_dists;
    for (const auto& [b_label, inst] : fam.instruments) {
        tn_dists.emplace_back();
        cm_dists.emplace_back();
        for (std::size_t ai = 0; ai < fam.unitaries.size(); ++ai) {
            const auto& [a_label, u] = fam.unitaries[ai];
            ++report.samples;
            std::vector<double> tn_dist;
            const bool tn_ok = influence_detail::pair_distribution(
                tn, space_a, space_b, u, inst, placement, tn_dist);
            const InterventionResult cm_res = session.run(a_label, b_label);
            if (!tn_ok) ++report.tn_inconsistent;
            if (!cm_res.consistent) ++report.cm_inconsistent;
            if (tn_ok != cm_res.consistent) {
                ++report.consistency_mismatches;
                continue;
            }
            if (!tn_ok) continue;
            ++report.consistent_pairs;
            std::vector<double> cm_dist(inst.labels.size(), 0.0);
            for (const auto& [key, p] : cm_res.probabilities) {
                const auto yit =
                    std::find(inst.labels.begin(), inst.labels.end(), key.second);
                cm_dist[static_cast<std::size_t>(yit - inst.labels.begin())] += p;
            }
            for (std::size_t y = 0; y < inst.labels.size(); ++y) {
                report.max_deviation =
                    std::max(report.max_deviation, std::abs(tn_dist[y] - cm_dist[y]));
            }
            tn_dists.back().push_back({ai, std::move(tn_dist)});
            cm_dists.back().push_back({ai, std::move(cm_dist)});
        }
    }
    report.tn_detected = influence_detail::family_detected(tn_dists, sampler.tol);
    report.cm_detected = influence_detail::family_detected(cm_dists, sampler.tol);
    report.verdicts_agree = report.tn_detected == report.cm_detected &&
                            report.consistency_mismatches == 0;
    return report;
}

} // namespace caten
