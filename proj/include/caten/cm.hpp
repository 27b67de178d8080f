// SPDX-License-Identifier: MIT
//
// Quantum causal models on directed graphs that may contain cycles.
// Vertices carry channels (unobserved) or measure-and-reprepare instruments
// (observed); outcome statistics arise from loop composition: every edge is
// produced by one vertex and consumed by another, and closing all the loops
// yields an unnormalized weight per joint outcome.  Also provides algebraic
// interventions (unitaries and instruments spliced onto edges) and a
// randomized signalling test.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "caten/choi.hpp"
#include "caten/errors.hpp"
#include "caten/graphs.hpp"
#include "caten/linalg.hpp"
#include "caten/rng.hpp"
#include "caten/tn.hpp"

namespace caten {

// A joint-outcome weight whose magnitude falls below this fraction of the
// summed magnitudes is treated as an exact structural zero.
inline constexpr double kInconsistencyTol = 1e-12;

namespace cm_detail {

// Inverse of tn_detail::operator_tensor: reads a rank-2k tensor (ket axes
// named by factor id, bra axes by id + "*", in any axis order) back into an
// operator with the given factor order.
inline SquareOperator operator_from_tensor(const DenseTensor& t,
                                           const std::vector<Factor>& space) {
    if (t.axes.size() != 2 * space.size()) {
        throw Error("operator_from_tensor: axis count does not match the space");
    }
    std::vector<std::size_t> strides(t.axes.size(), 1);
    for (std::size_t a = t.axes.size(); a-- > 1;) {
        strides[a - 1] = strides[a] * t.axes[a].dim;
    }
    auto axis_pos = [&](const std::string& id, std::size_t dim) {
        for (std::size_t a = 0; a < t.axes.size(); ++a) {
            if (t.axes[a].id != id) continue;
            if (t.axes[a].dim != dim) {
                throw Error("operator_from_tensor: dim mismatch on axis '" + id + "'");
            }
            return a;
        }
        throw Error("operator_from_tensor: missing axis '" + id + "'");
    };
    std::vector<std::size_t> ket_stride(space.size()), bra_stride(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
        ket_stride[k] = strides[axis_pos(space[k].id, space[k].dim)];
        bra_stride[k] = strides[axis_pos(space[k].id + "*", space[k].dim)];
    }
    const std::size_t d = space_dim(space);
    SquareOperator op;
    op.space = space;
    op.matrix = Eigen::MatrixXcd(d, d);
    std::vector<std::size_t> rd(space.size()), cd(space.size());
    for (std::size_t r = 0; r < d; ++r) {
        std::size_t rest = r;
        for (std::size_t k = space.size(); k-- > 0;) {
            rd[k] = rest % space[k].dim;
            rest /= space[k].dim;
        }
        for (std::size_t c = 0; c < d; ++c) {
            rest = c;
            for (std::size_t k = space.size(); k-- > 0;) {
                cd[k] = rest % space[k].dim;
                rest /= space[k].dim;
            }
            std::size_t lin = 0;
            for (std::size_t k = 0; k < space.size(); ++k) {
                lin += rd[k] * ket_stride[k] + cd[k] * bra_stride[k];
            }
            op.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                t.data[lin];
        }
    }
    return op;
}

// Canonical Choi layout: primed in-factors then out-factors.
inline std::vector<Factor> choi_space(const std::vector<Factor>& in_space,
                                      const std::vector<Factor>& out_space) {
    std::vector<Factor> s = primed_space(in_space);
    s.insert(s.end(), out_space.begin(), out_space.end());
    return s;
}

} // namespace cm_detail

// ---------------------------------------------------------------------------
// Loop composition.  For a map M whose input contains factor C and whose
// output contains factor A (of equal dim d), feeding A back into C yields
//     rho  |->  sum_{k,l} <k|_A M(|k><l|_C (x) rho) |l>_A
// on the remaining factors.  On the Choi matrix this is a sandwich between
// un-normalised maximally entangled states pairing C' with A, times d; all
// pairs are contracted simultaneously, which equals nesting in any order.

inline Superoperator self_cycle(
    const Superoperator& s,
    const std::vector<std::pair<std::string, std::string>>& loop_pairs) {
    std::set<std::string> used_in, used_out;
    double scale = 1.0;
    for (const auto& [in_id, out_id] : loop_pairs) {
        const Factor* fi = nullptr;
        for (const Factor& f : s.in_space) {
            if (f.id == in_id) fi = &f;
        }
        const Factor* fo = nullptr;
        for (const Factor& f : s.out_space) {
            if (f.id == out_id) fo = &f;
        }
        if (fi == nullptr) throw Error("self_cycle: unknown in-factor '" + in_id + "'");
        if (fo == nullptr) throw Error("self_cycle: unknown out-factor '" + out_id + "'");
        if (fi->dim != fo->dim) {
            throw Error("self_cycle: dim mismatch between '" + in_id + "' and '" +
                        out_id + "'");
        }
        if (!used_in.insert(in_id).second) {
            throw Error("self_cycle: in-factor '" + in_id + "' paired twice");
        }
        if (!used_out.insert(out_id).second) {
            throw Error("self_cycle: out-factor '" + out_id + "' paired twice");
        }
        scale *= static_cast<double>(fi->dim);
    }
    SquareOperator choi =
        tn_detail::reorder_factors(s.choi, cm_detail::choi_space(s.in_space, s.out_space));
    std::vector<std::string> ids;
    ids.reserve(choi.space.size());
    for (const Factor& f : s.in_space) ids.push_back(primed(f.id));
    for (const Factor& f : s.out_space) ids.push_back(f.id);
    DenseTensor t = tn_detail::operator_tensor(choi, ids);
    std::vector<Pairing> pairings;
    for (const auto& [in_id, out_id] : loop_pairs) {
        pairings.push_back({{0, primed(in_id)}, {0, out_id}});
        pairings.push_back({{0, primed(in_id) + "*"}, {0, out_id + "*"}});
    }
    DenseTensor r = contract_network({t}, pairings);
    Superoperator out;
    for (const Factor& f : s.in_space) {
        if (!used_in.count(f.id)) out.in_space.push_back(f);
    }
    for (const Factor& f : s.out_space) {
        if (!used_out.count(f.id)) out.out_space.push_back(f);
    }
    out.choi = cm_detail::operator_from_tensor(
        r, cm_detail::choi_space(out.in_space, out.out_space));
    out.choi.matrix *= scale;
    return out;
}

// ---------------------------------------------------------------------------
// Mechanisms.

// An instrument: one CP map per outcome, summing to a trace-preserving map.
struct Instrument {
    std::vector<std::string> outcomes;   // distinct labels, one per element
    std::vector<Superoperator> elements; // CP maps, same in/out spaces
};

struct CausalModel {
    DirectedCausalGraph graph;
    std::map<std::string, Superoperator> channels;   // unobserved vertex -> CPTP map
    std::map<std::string, Instrument> instruments;   // observed vertex -> instrument
};

// Boundary factors of a vertex, named by edge id, in edge-list order.
inline std::vector<Factor> in_factors(const DirectedCausalGraph& g, const std::string& v) {
    std::vector<Factor> out;
    for (std::size_t i : g.in_edges(v)) {
        out.push_back({g.edges()[i].id, static_cast<std::size_t>(g.edges()[i].dim)});
    }
    return out;
}

inline std::vector<Factor> out_factors(const DirectedCausalGraph& g, const std::string& v) {
    std::vector<Factor> out;
    for (std::size_t i : g.out_edges(v)) {
        out.push_back({g.edges()[i].id, static_cast<std::size_t>(g.edges()[i].dim)});
    }
    return out;
}

// Convenience channel builders.

inline Superoperator identity_channel(std::vector<Factor> space) {
    const std::size_t d = space_dim(space);
    Superoperator s;
    s.in_space = space;
    s.out_space = space;
    s.choi.space = cm_detail::choi_space(s.in_space, s.out_space);
    s.choi.matrix = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            s.choi.matrix(static_cast<Eigen::Index>(i * d + i),
                          static_cast<Eigen::Index>(j * d + j)) = 1.0 / static_cast<double>(d);
        }
    }
    return s;
}

// Preparation of a fixed state (a channel from the trivial space).
inline Superoperator state_preparation(std::vector<Factor> out_space,
                                       const Eigen::MatrixXcd& rho) {
    const std::size_t d = space_dim(out_space);
    if (rho.rows() != static_cast<Eigen::Index>(d) || rho.cols() != rho.rows()) {
        throw Error("state_preparation: state side does not match the space");
    }
    Superoperator s;
    s.out_space = std::move(out_space);
    s.choi.space = s.out_space;
    s.choi.matrix = rho;
    return s;
}

// Discards its input (a channel to the trivial space).
inline Superoperator trace_channel(std::vector<Factor> in_space) {
    const std::size_t d = space_dim(in_space);
    Superoperator s;
    s.in_space = std::move(in_space);
    s.choi.space = primed_space(s.in_space);
    s.choi.matrix =
        Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(d),
                                   static_cast<Eigen::Index>(d)) /
        static_cast<double>(d);
    return s;
}

namespace cm_detail {

// Basis index of the flag vector |x,x,...,x> on an out-space whose every
// factor has dim m.
inline std::size_t flag_index(std::size_t n_factors, std::size_t m, std::size_t x) {
    std::size_t f = 0;
    for (std::size_t k = 0; k < n_factors; ++k) f = f * m + x;
    return f;
}

// Checks factor multisets match, then reorders the Choi matrix into the
// canonical layout for the given boundary.
inline Superoperator canonicalize(Superoperator s, const std::vector<Factor>& in_space,
                                  const std::vector<Factor>& out_space,
                                  const std::string& where) {
    auto mismatched = [](std::vector<Factor> a, std::vector<Factor> b) {
        auto by_id = [](const Factor& x, const Factor& y) { return x.id < y.id; };
        std::sort(a.begin(), a.end(), by_id);
        std::sort(b.begin(), b.end(), by_id);
        return !(a == b);
    };
    if (mismatched(s.in_space, in_space)) {
        throw Error(where + ": in-space does not match the expected factors");
    }
    if (mismatched(s.out_space, out_space)) {
        throw Error(where + ": out-space does not match the expected factors");
    }
    s.choi = tn_detail::reorder_factors(s.choi, choi_space(in_space, out_space));
    s.in_space = in_space;
    s.out_space = out_space;
    return s;
}

} // namespace cm_detail

// Builds the instrument that measures the given POVM and writes the outcome
// into classical flag states on every out-edge of the vertex: element x maps
// rho to Tr[E_x rho] |x><x| (x) ... (x) |x><x|.
inline Instrument instrument_from_povm(const DirectedCausalGraph& g, const std::string& v,
                                       const std::vector<Eigen::MatrixXcd>& povm,
                                       const std::vector<std::string>& labels) {
    if (povm.empty() || povm.size() != labels.size()) {
        throw Error("instrument_from_povm: need one label per POVM element");
    }
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) {
        throw Error("instrument_from_povm: duplicate outcome label");
    }
    const std::vector<Factor> in_space = in_factors(g, v);
    const std::vector<Factor> out_space = out_factors(g, v);
    const std::size_t d_in = space_dim(in_space);
    const std::size_t d_out = space_dim(out_space);
    const std::size_t m = labels.size();
    for (const Factor& f : out_space) {
        if (f.dim != m) {
            throw Error("instrument_from_povm: out-edge '" + f.id + "' has dim " +
                        std::to_string(f.dim) + " but there are " + std::to_string(m) +
                        " outcomes");
        }
    }
    Instrument inst;
    inst.outcomes = labels;
    for (std::size_t x = 0; x < m; ++x) {
        if (povm[x].rows() != static_cast<Eigen::Index>(d_in) ||
            povm[x].cols() != povm[x].rows()) {
            throw Error("instrument_from_povm: POVM element side does not match the in-edges");
        }
        const std::size_t flag = cm_detail::flag_index(out_space.size(), m, x);
        Superoperator s;
        s.in_space = in_space;
        s.out_space = out_space;
        s.choi.space = cm_detail::choi_space(in_space, out_space);
        s.choi.matrix = Eigen::MatrixXcd::Zero(d_in * d_out, d_in * d_out);
        for (std::size_t i = 0; i < d_in; ++i) {
            for (std::size_t j = 0; j < d_in; ++j) {
                s.choi.matrix(static_cast<Eigen::Index>(i * d_out + flag),
                              static_cast<Eigen::Index>(j * d_out + flag)) =
                    povm[x](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) /
                    static_cast<double>(d_in);
            }
        }
        inst.elements.push_back(std::move(s));
    }
    return inst;
}

namespace cm_detail {

// Assembly behind make_causal_model.  The CP eigensolve on channels is
// optional so callers whose channels are positive by construction (sums of
// rank-one terms over vectorized Kraus operators) can skip the O(n^3)
// spectral check on large dilated mechanisms; every other validation is
// unconditional.
inline CausalModel assemble_model(DirectedCausalGraph graph,
                                  std::map<std::string, Superoperator> channels,
                                  std::map<std::string, Instrument> instruments,
                                  bool check_channel_cp) {
    for (const auto& [v, s] : channels) {
        (void)s;
        if (!graph.has_vertex(v)) {
            throw Error("make_causal_model: channel attached to unknown vertex '" + v + "'");
        }
        if (graph.kind(v) == VertexKind::Observed) {
            throw Error("make_causal_model: observed vertex '" + v +
                        "' must carry an instrument, not a channel");
        }
    }
    for (const auto& [v, inst] : instruments) {
        (void)inst;
        if (!graph.has_vertex(v)) {
            throw Error("make_causal_model: instrument attached to unknown vertex '" + v + "'");
        }
        if (graph.kind(v) == VertexKind::Unobserved) {
            throw Error("make_causal_model: unobserved vertex '" + v +
                        "' must carry a channel, not an instrument");
        }
    }
    CausalModel m{std::move(graph), {}, {}};
    for (const DirectedVertex& dv : m.graph.vertices()) {
        const std::string& v = dv.id;
        const std::vector<Factor> in_space = in_factors(m.graph, v);
        const std::vector<Factor> out_space = out_factors(m.graph, v);
        if (dv.kind == VertexKind::Unobserved) {
            auto it = channels.find(v);
            if (it == channels.end()) {
                throw Error("make_causal_model: unobserved vertex '" + v + "' needs a channel");
            }
            Superoperator s = canonicalize(std::move(it->second), in_space, out_space,
                                           "channel at vertex '" + v + "'");
            if (check_channel_cp && !is_cptp(s).cp) {
                throw Error("make_causal_model: channel at vertex '" + v + "' is not CP");
            }
            if (tp_residual(s) > kHermTol) {
                throw Error("make_causal_model: channel at vertex '" + v +
                            "' is not trace-preserving within tolerance");
            }
            m.channels.emplace(v, std::move(s));
            continue;
        }
        auto it = instruments.find(v);
        if (it == instruments.end()) {
            throw Error("make_causal_model: observed vertex '" + v + "' needs an instrument");
        }
        Instrument inst = std::move(it->second);
        if (inst.outcomes.empty() || inst.outcomes.size() != inst.elements.size()) {
            throw Error("make_causal_model: instrument at vertex '" + v +
                        "' needs one element per outcome");
        }
        std::set<std::string> seen(inst.outcomes.begin(), inst.outcomes.end());
        if (seen.size() != inst.outcomes.size()) {
            throw Error("make_causal_model: instrument at vertex '" + v +
                        "' has duplicate outcome labels");
        }
        const std::size_t n_outcomes = inst.outcomes.size();
        for (const Factor& f : out_space) {
            if (f.dim != n_outcomes) {
                throw Error("make_causal_model: out-edge '" + f.id + "' of observed vertex '" +
                            v + "' has dim " + std::to_string(f.dim) + " but the instrument has " +
                            std::to_string(n_outcomes) + " outcomes");
            }
        }
        const std::size_t d_in = space_dim(in_space);
        const std::size_t d_out = space_dim(out_space);
        Eigen::MatrixXcd marginal = Eigen::MatrixXcd::Zero(d_in * d_out, d_in * d_out);
        for (std::size_t x = 0; x < n_outcomes; ++x) {
            Superoperator s = cm_detail::canonicalize(
                std::move(inst.elements[x]), in_space, out_space,
                "instrument element '" + inst.outcomes[x] + "' at vertex '" + v + "'");
            if (!is_cptp(s).cp) {
                throw Error("make_causal_model: instrument element '" + inst.outcomes[x] +
                            "' at vertex '" + v + "' is not CP");
            }
            // Measure-and-reprepare form: the element must factor as a
            // POVM-weight block times the flag state |x..x><x..x| on the
            // out-edges.
            const std::size_t flag = cm_detail::flag_index(out_space.size(), n_outcomes, x);
            const double mag = std::max(1.0, s.choi.matrix.cwiseAbs().maxCoeff());
            double resid = 0.0;
            for (std::size_t i = 0; i < d_in; ++i) {
                for (std::size_t o1 = 0; o1 < d_out; ++o1) {
                    for (std::size_t j = 0; j < d_in; ++j) {
                        for (std::size_t o2 = 0; o2 < d_out; ++o2) {
                            if (o1 == flag && o2 == flag) continue;
                            resid = std::max(
                                resid, std::abs(s.choi.matrix(
                                           static_cast<Eigen::Index>(i * d_out + o1),
                                           static_cast<Eigen::Index>(j * d_out + o2))));
                        }
                    }
                }
            }
            if (resid > kHermTol * mag) {
                throw Error("make_causal_model: instrument element '" + inst.outcomes[x] +
                            "' at vertex '" + v + "' is not of measure-and-reprepare form");
            }
            marginal += s.choi.matrix;
            inst.elements[x] = std::move(s);
        }
        Superoperator marg;
        marg.in_space = in_space;
        marg.out_space = out_space;
        marg.choi.space = cm_detail::choi_space(in_space, out_space);
        marg.choi.matrix = std::move(marginal);
        if (!is_cptp(marg).tp) {
            throw Error("make_causal_model: instrument at vertex '" + v +
                        "' does not sum to a trace-preserving map");
        }
        m.instruments.emplace(v, std::move(inst));
    }
    return m;
}

} // namespace cm_detail

// Validates mechanisms against the graph and canonicalizes their factor
// order (in/out factors in edge-list order, named by edge id).
inline CausalModel make_causal_model(DirectedCausalGraph graph,
                                     std::map<std::string, Superoperator> channels,
                                     std::map<std::string, Instrument> instruments) {
    return cm_detail::assemble_model(std::move(graph), std::move(channels),
                                     std::move(instruments), true);
}

// ---------------------------------------------------------------------------
// Scalar loop closure of a set of maps whose wires match by factor id: every
// factor id must appear exactly once among the in-spaces and once among the
// out-spaces across all nodes.  Evaluated as a contraction of the Choi
// tensors (never materializing the joint map); the product of in-space dims
// restores the Choi normalization.

namespace cm_detail {

// One map prepared for loop closure: its Choi tensor with axis ids
// primed(in-factor id) and out-factor id plus their starred doubles, where
// factors both consumed and produced by the same map (self-loops) are traced
// out immediately.  For dilated mechanisms the self-loops carry almost all
// of the dimension, so the surviving tensor is small and preparing nodes
// once makes repeated closures cheap.  `scale` keeps the full input
// dimension so the Choi normalization is restored for traced factors too.
struct CycleNode {
    std::vector<Factor> in_space;   // factors consumed from other nodes
    std::vector<Factor> out_space;  // factors produced for other nodes
    double scale = 1.0;
    DenseTensor tensor;
};

inline CycleNode make_cycle_node(const Superoperator& s) {
    std::set<std::string> ins, outs;
    std::map<std::string, std::size_t> out_dim;
    for (const Factor& f : s.in_space) {
        if (!ins.insert(f.id).second) {
            throw Error("cycle_value: factor '" + f.id + "' consumed twice");
        }
    }
    for (const Factor& f : s.out_space) {
        if (!outs.insert(f.id).second) {
            throw Error("cycle_value: factor '" + f.id + "' produced twice");
        }
        out_dim[f.id] = f.dim;
    }
    std::vector<std::string> ids;
    ids.reserve(s.in_space.size() + s.out_space.size());
    for (const Factor& f : s.in_space) ids.push_back(primed(f.id));
    for (const Factor& f : s.out_space) ids.push_back(f.id);
    SquareOperator choi =
        tn_detail::reorder_factors(s.choi, choi_space(s.in_space, s.out_space));
    CycleNode node;
    node.scale = static_cast<double>(s.d_in());
    node.tensor = tn_detail::operator_tensor(choi, ids);
    std::vector<std::pair<std::size_t, std::size_t>> self;
    for (const Factor& f : s.in_space) {
        if (!outs.count(f.id)) {
            node.in_space.push_back(f);
            continue;
        }
        if (out_dim.at(f.id) != f.dim) {
            throw Error("cycle_value: dim mismatch on factor '" + f.id + "'");
        }
        self.emplace_back(node.tensor.axis_index(f.id),
                          node.tensor.axis_index(primed(f.id)));
        self.emplace_back(node.tensor.axis_index(f.id + "*"),
                          node.tensor.axis_index(primed(f.id) + "*"));
    }
    for (const Factor& f : s.out_space) {
        if (!ins.count(f.id)) node.out_space.push_back(f);
    }
    if (!self.empty()) node.tensor = detail::trace_pairs(node.tensor, self);
    return node;
}

inline double cycle_value(const std::vector<const CycleNode*>& nodes) {
    std::map<std::string, int> producer, consumer;
    std::map<std::string, std::size_t> out_dim, in_dim;
    std::vector<DenseTensor> tensors;
    tensors.reserve(nodes.size());
    double scale = 1.0;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        const CycleNode& node = *nodes[i];
        scale *= node.scale;
        for (const Factor& f : node.in_space) {
            if (!consumer.emplace(f.id, i).second) {
                throw Error("cycle_value: factor '" + f.id + "' consumed twice");
            }
            in_dim[f.id] = f.dim;
        }
        for (const Factor& f : node.out_space) {
            if (!producer.emplace(f.id, i).second) {
                throw Error("cycle_value: factor '" + f.id + "' produced twice");
            }
            out_dim[f.id] = f.dim;
        }
        tensors.push_back(node.tensor);
    }
    for (const auto& [id, i] : consumer) {
        (void)i;
        if (!producer.count(id)) {
            throw Error("cycle_value: factor '" + id + "' has no producer");
        }
    }
    std::vector<Pairing> pairings;
    for (const auto& [id, pi] : producer) {
        auto it = consumer.find(id);
        if (it == consumer.end()) {
            throw Error("cycle_value: factor '" + id + "' has no consumer");
        }
        if (out_dim[id] != in_dim[id]) {
            throw Error("cycle_value: dim mismatch on factor '" + id + "'");
        }
        pairings.push_back({{pi, id}, {it->second, primed(id)}});
        pairings.push_back({{pi, id + "*"}, {it->second, primed(id) + "*"}});
    }
    DenseTensor r = contract_network(tensors, pairings);
    if (!r.axes.empty()) {
        throw Error("cycle_value: unexpected free axes after closure");
    }
    const cplx v = r.data[0] * scale;
    if (std::abs(v.imag()) > kImagResidueTol * std::max(1.0, std::abs(v.real()))) {
        throw Error("cycle_value: non-negligible imaginary residue");
    }
    return v.real();
}

inline double cycle_value(const std::vector<const Superoperator*>& nodes) {
    std::vector<CycleNode> owned;
    owned.reserve(nodes.size());
    for (const Superoperator* s : nodes) owned.push_back(make_cycle_node(*s));
    std::vector<const CycleNode*> ptrs;
    ptrs.reserve(owned.size());
    for (const CycleNode& n : owned) ptrs.push_back(&n);
    return cycle_value(ptrs);
}

// Observed vertex ids, lexicographically sorted: the joint-outcome order.
inline std::vector<std::string> observed_sorted(const DirectedCausalGraph& g) {
    std::vector<std::string> out;
    for (const DirectedVertex& dv : g.vertices()) {
        if (dv.kind == VertexKind::Observed) out.push_back(dv.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Cartesian product of outcome labels, aligned with `order`.
inline std::vector<std::vector<std::string>> joint_outcomes(
    const CausalModel& m, const std::vector<std::string>& order) {
    std::vector<std::vector<std::string>> outs{{}};
    for (const std::string& v : order) {
        const std::vector<std::string>& labels = m.instruments.at(v).outcomes;
        std::vector<std::vector<std::string>> next;
        next.reserve(outs.size() * labels.size());
        for (const auto& base : outs) {
            for (const std::string& l : labels) {
                std::vector<std::string> x = base;
                x.push_back(l);
                next.push_back(std::move(x));
            }
        }
        outs = std::move(next);
    }
    return outs;
}

// Mechanism element selected by a joint outcome.
inline const Superoperator& element_for(const CausalModel& m,
                                        const std::vector<std::string>& order,
                                        const std::vector<std::string>& x,
                                        const std::string& v) {
    if (m.graph.kind(v) == VertexKind::Unobserved) return m.channels.at(v);
    const Instrument& inst = m.instruments.at(v);
    const auto vit = std::lower_bound(order.begin(), order.end(), v);
    const std::string& label = x[static_cast<std::size_t>(vit - order.begin())];
    for (std::size_t k = 0; k < inst.outcomes.size(); ++k) {
        if (inst.outcomes[k] == label) return inst.elements[k];
    }
    throw Error("element_for: unknown outcome label '" + label + "'");
}

} // namespace cm_detail

// ---------------------------------------------------------------------------
// Total maps: the tensor product of all mechanisms for one joint outcome,
// a map from a primed copy of the full edge space to the edge space.

struct TotalMapFamily {
    std::vector<std::string> outcome_vertices; // observed vertices, sorted
    std::map<std::vector<std::string>, Superoperator> by_outcome;
    Superoperator marginal;                    // sum over joint outcomes
};

inline TotalMapFamily total_maps(const CausalModel& m) {
    TotalMapFamily fam;
    fam.outcome_vertices = cm_detail::observed_sorted(m.graph);
    std::vector<Factor> edge_space;
    for (const DirectedEdge& e : m.graph.edges()) {
        edge_space.push_back({e.id, static_cast<std::size_t>(e.dim)});
    }
    const std::vector<Factor> target = cm_detail::choi_space(edge_space, edge_space);
    for (const auto& x : cm_detail::joint_outcomes(m, fam.outcome_vertices)) {
        // Each edge is consumed by exactly one vertex and produced by
        // exactly one, so the dims in the product of in-spaces multiply to
        // the edge-space dim and the Choi normalizations compose exactly.
        SquareOperator acc = SquareOperator::identity({});
        for (const DirectedVertex& dv : m.graph.vertices()) {
            acc = tensor_product(
                acc, cm_detail::element_for(m, fam.outcome_vertices, x, dv.id).choi);
        }
        Superoperator e;
        e.in_space = edge_space;
        e.out_space = edge_space;
        e.choi = tn_detail::reorder_factors(acc, target);
        fam.by_outcome.emplace(x, std::move(e));
    }
    fam.marginal.in_space = edge_space;
    fam.marginal.out_space = edge_space;
    fam.marginal.choi = SquareOperator::zero(target);
    for (const auto& [x, e] : fam.by_outcome) {
        (void)x;
        fam.marginal.choi.matrix += e.choi.matrix;
    }
    return fam;
}

// ---------------------------------------------------------------------------
// The outcome distribution: close every edge loop of each total map and
// normalize across joint outcomes.  A vanishing normalizer means the model
// assigns no consistent statistics.

struct ProbabilityResult {
    bool consistent = false;
    std::vector<std::string> outcome_vertices;
    std::map<std::vector<std::string>, double> probabilities; // empty if inconsistent
    double denominator = 0.0; // sum of loop-closure weights
};

inline ProbabilityResult probabilities(const CausalModel& m) {
    ProbabilityResult res;
    res.outcome_vertices = cm_detail::observed_sorted(m.graph);
    const auto outcomes = cm_detail::joint_outcomes(m, res.outcome_vertices);
    std::vector<double> vals;
    vals.reserve(outcomes.size());
    double total = 0.0;
    double scale = 0.0;
    for (const auto& x : outcomes) {
        std::vector<const Superoperator*> nodes;
        nodes.reserve(m.graph.vertices().size());
        for (const DirectedVertex& dv : m.graph.vertices()) {
            nodes.push_back(&cm_detail::element_for(m, res.outcome_vertices, x, dv.id));
        }
        const double c = cm_detail::cycle_value(nodes);
        vals.push_back(c);
        total += c;
        scale += std::abs(c);
    }
    res.denominator = total;
    if (std::abs(total) <= kInconsistencyTol * std::max(1.0, scale)) {
        return res; // inconsistent
    }
    res.consistent = true;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        res.probabilities.emplace(outcomes[k], vals[k] / total);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Interventions: a labeled family of unitary channels on one set of edges
// and of instruments on another.  The chosen maps are spliced into the
// edges between producer and consumer before the loops are closed.

struct InterventionSpec {
    std::vector<std::string> lab_a; // edge ids, edge-list order
    std::vector<std::string> lab_b;
    std::map<std::string, Superoperator> a_family; // label -> unitary channel
    std::map<std::string, Instrument> b_family;    // label -> instrument
};

inline InterventionSpec make_intervention_spec(
    const DirectedCausalGraph& g, std::vector<std::string> lab_a,
    std::vector<std::string> lab_b, std::map<std::string, Superoperator> a_family,
    std::map<std::string, Instrument> b_family) {
    auto lab_space = [&g](std::vector<std::string>& lab, const char* name) {
        std::set<std::string> seen;
        for (const std::string& id : lab) {
            if (!seen.insert(id).second) {
                throw Error(std::string("make_intervention_spec: duplicate edge '") + id +
                            "' in " + name);
            }
        }
        // canonical order: edge-list order
        std::vector<Factor> space;
        std::vector<std::string> ordered;
        for (const DirectedEdge& e : g.edges()) {
            if (!seen.count(e.id)) continue;
            ordered.push_back(e.id);
            space.push_back({e.id, static_cast<std::size_t>(e.dim)});
        }
        if (ordered.size() != lab.size()) {
            for (const std::string& id : lab) {
                if (!std::any_of(g.edges().begin(), g.edges().end(),
                                 [&](const DirectedEdge& e) { return e.id == id; })) {
                    throw Error("make_intervention_spec: unknown edge '" + id + "'");
                }
            }
        }
        lab = std::move(ordered);
        return space;
    };
    InterventionSpec spec;
    spec.lab_a = std::move(lab_a);
    spec.lab_b = std::move(lab_b);
    const std::vector<Factor> space_a = lab_space(spec.lab_a, "lab_a");
    const std::vector<Factor> space_b = lab_space(spec.lab_b, "lab_b");
    for (const std::string& id : spec.lab_a) {
        if (std::find(spec.lab_b.begin(), spec.lab_b.end(), id) != spec.lab_b.end()) {
            throw Error("make_intervention_spec: labs must be disjoint (edge '" + id + "')");
        }
    }
    if (a_family.empty()) throw Error("make_intervention_spec: a_family must not be empty");
    if (b_family.empty()) throw Error("make_intervention_spec: b_family must not be empty");
    for (auto& [label, s] : a_family) {
        s = cm_detail::canonicalize(std::move(s), space_a, space_a,
                                    "a-family member '" + label + "'");
        CptpReport rep = is_cptp(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.choi.matrix,
                                                           Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues(); // ascending
        const double lmax = ev(ev.size() - 1);
        const double second = ev.size() > 1 ? ev(ev.size() - 2) : 0.0;
        if (!rep.cp || !rep.tp || second > kHermTol * std::max(1.0, lmax)) {
            throw Error("make_intervention_spec: a-family member '" + label +
                        "' is not a unitary channel");
        }
    }
    const std::vector<std::string>* outcome_set = nullptr;
    for (auto& [label, inst] : b_family) {
        if (inst.outcomes.empty() || inst.outcomes.size() != inst.elements.size()) {
            throw Error("make_intervention_spec: b-family member '" + label +
                        "' needs one element per outcome");
        }
        std::set<std::string> seen(inst.outcomes.begin(), inst.outcomes.end());
        if (seen.size() != inst.outcomes.size()) {
            throw Error("make_intervention_spec: b-family member '" + label +
                        "' has duplicate outcome labels");
        }
        if (outcome_set == nullptr) {
            outcome_set = &inst.outcomes;
        } else if (inst.outcomes != *outcome_set) {
            throw Error("make_intervention_spec: b-family members must share one outcome set");
        }
        const std::size_t d = space_dim(space_b);
        Eigen::MatrixXcd marginal = Eigen::MatrixXcd::Zero(d * d, d * d);
        for (std::size_t k = 0; k < inst.elements.size(); ++k) {
            inst.elements[k] = cm_detail::canonicalize(
                std::move(inst.elements[k]), space_b, space_b,
                "b-family member '" + label + "' element '" + inst.outcomes[k] + "'");
            if (!is_cptp(inst.elements[k]).cp) {
                throw Error("make_intervention_spec: b-family member '" + label +
                            "' element '" + inst.outcomes[k] + "' is not CP");
            }
            marginal += inst.elements[k].choi.matrix;
        }
        Superoperator marg;
        marg.in_space = space_b;
        marg.out_space = space_b;
        marg.choi.space = cm_detail::choi_space(space_b, space_b);
        marg.choi.matrix = std::move(marginal);
        if (!is_cptp(marg).tp) {
            throw Error("make_intervention_spec: b-family member '" + label +
                        "' does not sum to a trace-preserving map");
        }
    }
    spec.a_family = std::move(a_family);
    spec.b_family = std::move(b_family);
    return spec;
}

namespace cm_detail {

// Post-splice wire name.  Edge ids cannot contain a prime character, so the
// renamed wire can never collide with an existing edge id.
inline std::string post_wire(const std::string& edge_id) { return edge_id + "'post"; }

// Renames one in-factor (and its primed Choi slot); relies on the canonical
// Choi layout (primed in-factors first, in order).
inline Superoperator rename_in_factor(Superoperator s, const std::string& from,
                                      const std::string& to) {
    for (std::size_t k = 0; k < s.in_space.size(); ++k) {
        if (s.in_space[k].id != from) continue;
        s.in_space[k].id = to;
        s.choi.space[k].id = primed(to);
        return s;
    }
    throw Error("rename_in_factor: no factor '" + from + "'");
}

inline Superoperator rename_out_factor(Superoperator s, const std::string& from,
                                       const std::string& to) {
    for (std::size_t k = 0; k < s.out_space.size(); ++k) {
        if (s.out_space[k].id != from) continue;
        s.out_space[k].id = to;
        s.choi.space[s.in_space.size() + k].id = to;
        return s;
    }
    throw Error("rename_out_factor: no factor '" + from + "'");
}

} // namespace cm_detail

struct InterventionResult {
    bool consistent = false;
    std::vector<std::string> outcome_vertices;    // observed model vertices
    std::vector<std::string> instrument_outcomes; // the b-instrument outcome set
    // (joint model outcome, instrument outcome) -> probability
    std::map<std::pair<std::vector<std::string>, std::string>, double> probabilities;
    double denominator = 0.0;
};

// Prepared intervention machinery: splice renames are applied and every
// mechanism and family member is converted to its loop-closure node once, so
// sweeping many (a, b) label pairs over one model avoids re-converting large
// dilated Choi tensors on every call.
class InterventionSession {
  public:
    InterventionSession(const CausalModel& m, InterventionSpec spec) {
        for (const auto& [label, inst] : spec.b_family) {
            if (inst.elements.empty()) {
                throw Error("intervene: b-family member '" + label + "' has no elements");
            }
        }
        // The spec may have been built against another graph; check the lab
        // edges exist here with the right dims.
        std::map<std::string, const DirectedEdge*> edge_of;
        for (const DirectedEdge& e : m.graph.edges()) edge_of.emplace(e.id, &e);
        auto check_lab = [&](const std::vector<std::string>& lab,
                             const std::vector<Factor>& space) {
            for (std::size_t k = 0; k < lab.size(); ++k) {
                auto it = edge_of.find(lab[k]);
                if (it == edge_of.end() ||
                    static_cast<std::size_t>(it->second->dim) != space[k].dim) {
                    throw Error("intervene: lab edge '" + lab[k] +
                                "' does not match the model graph");
                }
            }
        };
        for (const auto& [label, s] : spec.a_family) {
            (void)label;
            check_lab(spec.lab_a, s.in_space);
        }
        for (const auto& [label, inst] : spec.b_family) {
            (void)label;
            check_lab(spec.lab_b, inst.elements.front().in_space);
        }
        // Downstream consumers of lab edges read the post-splice wire instead.
        std::map<std::string, std::vector<std::string>> renames; // vertex -> lab edges
        std::vector<std::string> all_lab = spec.lab_a;
        all_lab.insert(all_lab.end(), spec.lab_b.begin(), spec.lab_b.end());
        for (const std::string& e : all_lab) {
            renames[edge_of.at(e)->to].push_back(e);
        }

        outcome_vertices_ = cm_detail::observed_sorted(m.graph);
        outcomes_ = cm_detail::joint_outcomes(m, outcome_vertices_);
        for (const DirectedVertex& dv : m.graph.vertices()) {
            const auto rit = renames.find(dv.id);
            auto prep = [&](const Superoperator& s0) {
                if (rit == renames.end()) return cm_detail::make_cycle_node(s0);
                Superoperator s = s0;
                for (const std::string& e : rit->second) {
                    s = cm_detail::rename_in_factor(std::move(s), e, cm_detail::post_wire(e));
                }
                return cm_detail::make_cycle_node(s);
            };
            if (dv.kind == VertexKind::Unobserved) {
                vertex_nodes_.push_back({prep(m.channels.at(dv.id))});
                outcome_slot_.push_back(-1);
                vertex_outcomes_.push_back({});
                continue;
            }
            const Instrument& inst = m.instruments.at(dv.id);
            std::vector<cm_detail::CycleNode> opts;
            opts.reserve(inst.elements.size());
            for (const Superoperator& el : inst.elements) opts.push_back(prep(el));
            vertex_nodes_.push_back(std::move(opts));
            const auto vit = std::lower_bound(outcome_vertices_.begin(),
                                              outcome_vertices_.end(), dv.id);
            outcome_slot_.push_back(static_cast<int>(vit - outcome_vertices_.begin()));
            vertex_outcomes_.push_back(inst.outcomes);
        }

        for (const auto& [label, s] : spec.a_family) {
            Superoperator a = s;
            for (const std::string& e : spec.lab_a) {
                a = cm_detail::rename_out_factor(std::move(a), e, cm_detail::post_wire(e));
            }
            a_nodes_.emplace(label, cm_detail::make_cycle_node(a));
        }
        for (const auto& [label, inst] : spec.b_family) {
            PreparedInstrument p;
            p.outcomes = inst.outcomes;
            p.elements.reserve(inst.elements.size());
            for (const Superoperator& el : inst.elements) {
                Superoperator b = el;
                for (const std::string& e : spec.lab_b) {
                    b = cm_detail::rename_out_factor(std::move(b), e, cm_detail::post_wire(e));
                }
                p.elements.push_back(cm_detail::make_cycle_node(b));
            }
            b_nodes_.emplace(label, std::move(p));
        }
    }

    InterventionResult run(const std::string& a_label, const std::string& b_label) const {
        const auto ait = a_nodes_.find(a_label);
        if (ait == a_nodes_.end()) {
            throw Error("intervene: unknown a-family label '" + a_label + "'");
        }
        const auto bit = b_nodes_.find(b_label);
        if (bit == b_nodes_.end()) {
            throw Error("intervene: unknown b-family label '" + b_label + "'");
        }
        InterventionResult res;
        res.outcome_vertices = outcome_vertices_;
        res.instrument_outcomes = bit->second.outcomes;
        std::vector<std::pair<std::pair<std::vector<std::string>, std::string>, double>> vals;
        double total = 0.0;
        double scale = 0.0;
        std::vector<const cm_detail::CycleNode*> nodes(vertex_nodes_.size() + 2, nullptr);
        for (const auto& x : outcomes_) {
            for (std::size_t vi = 0; vi < vertex_nodes_.size(); ++vi) {
                std::size_t k = 0;
                if (outcome_slot_[vi] >= 0) {
                    const std::string& label = x[static_cast<std::size_t>(outcome_slot_[vi])];
                    const std::vector<std::string>& outs = vertex_outcomes_[vi];
                    k = static_cast<std::size_t>(
                        std::find(outs.begin(), outs.end(), label) - outs.begin());
                    if (k == outs.size()) {
                        throw Error("element_for: unknown outcome label '" + label + "'");
                    }
                }
                nodes[vi] = &vertex_nodes_[vi][k];
            }
            nodes[vertex_nodes_.size()] = &ait->second;
            for (std::size_t y = 0; y < bit->second.elements.size(); ++y) {
                nodes[vertex_nodes_.size() + 1] = &bit->second.elements[y];
                const double c = cm_detail::cycle_value(nodes);
                vals.push_back({{x, res.instrument_outcomes[y]}, c});
                total += c;
                scale += std::abs(c);
            }
        }
        res.denominator = total;
        if (std::abs(total) <= kInconsistencyTol * std::max(1.0, scale)) {
            return res; // inconsistent intervention
        }
        res.consistent = true;
        for (auto& [key, c] : vals) {
            res.probabilities.emplace(std::move(key), c / total);
        }
        return res;
    }

  private:
    struct PreparedInstrument {
        std::vector<std::string> outcomes;
        std::vector<cm_detail::CycleNode> elements;
    };
    std::vector<std::string> outcome_vertices_;
    std::vector<std::vector<std::string>> outcomes_;
    // per graph vertex: prepared channel ([0]) or one node per instrument element
    std::vector<std::vector<cm_detail::CycleNode>> vertex_nodes_;
    std::vector<int> outcome_slot_; // index into a joint outcome, -1 if unobserved
    std::vector<std::vector<std::string>> vertex_outcomes_;
    std::map<std::string, cm_detail::CycleNode> a_nodes_;
    std::map<std::string, PreparedInstrument> b_nodes_;
};

inline InterventionResult intervene(const CausalModel& m, const InterventionSpec& spec,
                                    const std::string& a_label, const std::string& b_label) {
    const auto ait = spec.a_family.find(a_label);
    if (ait == spec.a_family.end()) {
        throw Error("intervene: unknown a-family label '" + a_label + "'");
    }
    const auto bit = spec.b_family.find(b_label);
    if (bit == spec.b_family.end()) {
        throw Error("intervene: unknown b-family label '" + b_label + "'");
    }
    // One-shot: prepare a session holding just the requested pair.
    InterventionSpec one;
    one.lab_a = spec.lab_a;
    one.lab_b = spec.lab_b;
    one.a_family.emplace(a_label, ait->second);
    one.b_family.emplace(b_label, bit->second);
    return InterventionSession(m, std::move(one)).run(a_label, b_label);
}

// ---------------------------------------------------------------------------
// Signalling: does the choice of unitary on lab_a shift the marginal
// instrument statistics on lab_b?

struct AllInterventionsInconsistent : Error {
    using Error::Error;
};

struct SignallingVerdict {
    bool detected = false;
    std::string a, a_prime, b, y; // witness, when detected
    double deviation = 0.0;
    std::size_t comparisons = 0;          // (b, a<a', y) triples compared
    std::size_t inconsistent_skipped = 0; // interventions with vanishing normalizer
};

inline SignallingVerdict detect_signalling(const CausalModel& m,
                                           const InterventionSpec& spec, double tol) {
    SignallingVerdict verdict;
    const InterventionSession session(m, spec);
    std::size_t total_calls = 0;
    for (const auto& [b_label, inst] : spec.b_family) {
        // marginal P(y | a, b), per consistent a
        std::vector<std::pair<std::string, std::vector<double>>> py;
        for (const auto& [a_label, ch] : spec.a_family) {
            (void)ch;
            ++total_calls;
            const InterventionResult r = session.run(a_label, b_label);
            if (!r.consistent) {
                ++verdict.inconsistent_skipped;
                continue;
            }
            std::vector<double> marg(inst.outcomes.size(), 0.0);
            for (const auto& [key, p] : r.probabilities) {
                const auto yit = std::find(inst.outcomes.begin(), inst.outcomes.end(),
                                           key.second);
                marg[static_cast<std::size_t>(yit - inst.outcomes.begin())] += p;
            }
            py.push_back({a_label, std::move(marg)});
        }
        for (std::size_t i = 0; i < py.size(); ++i) {
            for (std::size_t j = i + 1; j < py.size(); ++j) {
                for (std::size_t y = 0; y < inst.outcomes.size(); ++y) {
                    ++verdict.comparisons;
                    const double dev = std::abs(py[i].second[y] - py[j].second[y]);
                    if (dev > tol) {
                        verdict.detected = true;
                        verdict.a = py[i].first;
                        verdict.a_prime = py[j].first;
                        verdict.b = b_label;
                        verdict.y = inst.outcomes[y];
                        verdict.deviation = dev;
                        return verdict;
                    }
                }
            }
        }
    }
    if (verdict.inconsistent_skipped == total_calls) {
        throw AllInterventionsInconsistent(
            "detect_signalling: every intervention had a vanishing normalizer");
    }
    return verdict;
}

// Randomized intervention family: deterministic members (identity, cyclic
// shift, phase clock; computational readout) plus seeded Haar-random ones.
// A NotDetected verdict is always relative to this sampling budget.
struct SignallingSampler {
    std::vector<std::string> lab_a;
    std::vector<std::string> lab_b;
    std::uint64_t seed = 0;
    std::size_t n_samples = 16; // random members added per family
    double tol = 1e-9;
};

namespace cm_detail {

inline Eigen::MatrixXcd shift_matrix(std::size_t d) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        x(static_cast<Eigen::Index>((j + 1) % d), static_cast<Eigen::Index>(j)) = 1.0;
    }
    return x;
}

inline Eigen::MatrixXcd clock_matrix(std::size_t d) {
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(d);
        z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = cplx(std::cos(phi), std::sin(phi));
    }
    return z;
}

} // namespace cm_detail

inline InterventionSpec sampled_intervention_spec(const DirectedCausalGraph& g,
                                                  const SignallingSampler& sampler) {
    if (sampler.n_samples < 1) {
        throw Error("sampled_intervention_spec: n_samples must be at least 1");
    }
    auto space_of = [&g](const std::vector<std::string>& lab) {
        std::vector<Factor> space;
        for (const DirectedEdge& e : g.edges()) {
            if (std::find(lab.begin(), lab.end(), e.id) != lab.end()) {
                space.push_back({e.id, static_cast<std::size_t>(e.dim)});
            }
        }
        return space;
    };
    const std::vector<Factor> space_a = space_of(sampler.lab_a);
    const std::vector<Factor> space_b = space_of(sampler.lab_b);
    const std::size_t d_a = space_dim(space_a);
    const std::size_t d_b = space_dim(space_b);

    std::map<std::string, Superoperator> a_family;
    a_family.emplace("I", identity_channel(space_a));
    if (d_a >= 2) {
        a_family.emplace("X", superoperator_from_kraus({cm_detail::shift_matrix(d_a)},
                                                       space_a, space_a));
        a_family.emplace("Z", superoperator_from_kraus({cm_detail::clock_matrix(d_a)},
                                                       space_a, space_a));
    }
    for (std::size_t k = 1; k <= sampler.n_samples; ++k) {
        Rng rng(mix_seed(sampler.seed, 2 * k));
        a_family.emplace("U" + std::to_string(k),
                         superoperator_from_kraus(
                             {rng.haar_unitary(static_cast<Eigen::Index>(d_a))},
                             space_a, space_a));
    }

    auto readout = [&space_b, d_b](const Eigen::MatrixXcd& v) {
        Instrument inst;
        for (std::size_t y = 0; y < d_b; ++y) {
            inst.outcomes.push_back(std::to_string(y));
            Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(d_b, d_b);
            k.row(static_cast<Eigen::Index>(y)) = v.row(static_cast<Eigen::Index>(y));
            inst.elements.push_back(superoperator_from_kraus({k}, space_b, space_b));
        }
        return inst;
    };
    std::map<std::string, Instrument> b_family;
    b_family.emplace("comp",
                     readout(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(d_b),
                                                        static_cast<Eigen::Index>(d_b))));
    for (std::size_t k = 1; k <= sampler.n_samples; ++k) {
        Rng rng(mix_seed(sampler.seed, 2 * k + 1));
        b_family.emplace("V" + std::to_string(k),
                         readout(rng.haar_unitary(static_cast<Eigen::Index>(d_b))));
    }
    return make_intervention_spec(g, sampler.lab_a, sampler.lab_b, std::move(a_family),
                                  std::move(b_family));
}

inline SignallingVerdict detect_signalling(const CausalModel& m,
                                           const SignallingSampler& sampler) {
    const InterventionSpec spec = sampled_intervention_spec(m.graph, sampler);
    return detect_signalling(m, spec, sampler.tol);
}

} // namespace caten
