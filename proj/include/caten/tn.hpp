// SPDX-License-Identifier: MIT
// Tensor networks on undirected multigraphs: tensor embedding, link and
// total states, planned contraction, and two-sided correlation functions.
#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "caten/errors.hpp"
#include "caten/graphs.hpp"
#include "caten/linalg.hpp"

namespace caten {

// Largest imaginary residue tolerated when a contraction value is asserted
// to be real.
inline constexpr double kImagResidueTol = 1e-10;

namespace tn_detail {

// Every edge owns two copies of its Hilbert space, one per attachment to a
// vertex.  The copy at vertex v is named "<edge>!<vertex>"; a self-loop
// attaches twice and its second copy is named "<edge>!<vertex>!2".
inline std::string copy_id(const std::string& edge, const std::string& vertex,
                           int attachment) {
    std::string id = edge + "!" + vertex;
    if (attachment == 1) id += "!2";
    return id;
}

// Copy ids of a vertex's slots, positionally matching vertex_factor_layout
// (generated edge ids may contain '!', so slot roles are resolved from the
// graph rather than by parsing factor ids).
inline std::vector<std::string> vertex_copy_ids(const UndirectedMultigraph& g,
                                                const std::string& v) {
    std::vector<std::string> ids;
    for (const UndirectedEdge& e : g.edges()) {
        if (e.u == v && e.v == v) {
            ids.push_back(copy_id(e.id, v, 0));
            ids.push_back(copy_id(e.id, v, 1));
        } else if (e.u == v || e.v == v) {
            ids.push_back(copy_id(e.id, v, 0));
        }
    }
    return ids;
}

// Reorder an operator's factor slots to the target order (a permutation of
// the same ids and dims).
inline SquareOperator reorder_factors(const SquareOperator& op,
                                      const std::vector<Factor>& target) {
    if (target.size() != op.space.size()) {
        throw Error("reorder_factors: factor count mismatch");
    }
    bool same = true;
    for (std::size_t i = 0; i < target.size(); ++i) {
        same = same && target[i] == op.space[i];
    }
    if (same) return op;
    for (const Factor& f : target) {
        if (op.space[op.factor_index(f.id)].dim != f.dim) {
            throw Error("reorder_factors: dim mismatch on factor '" + f.id + "'");
        }
    }

    std::vector<Axis> axes;
    axes.reserve(2 * op.space.size());
    for (const Factor& f : op.space) axes.push_back({f.id, f.dim});
    for (const Factor& f : op.space) axes.push_back({f.id + "*", f.dim});
    DenseTensor t = DenseTensor::zeros(axes);
    const std::size_t s = op.side();
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            t.data[r * s + c] = op.matrix(static_cast<Eigen::Index>(r),
                                          static_cast<Eigen::Index>(c));
        }
    }
    std::vector<std::string> order;
    order.reserve(2 * target.size());
    for (const Factor& f : target) order.push_back(f.id);
    for (const Factor& f : target) order.push_back(f.id + "*");
    DenseTensor p = t.permuted(order);

    SquareOperator out;
    out.space = target;
    out.matrix = Eigen::MatrixXcd(s, s);
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            out.matrix(static_cast<Eigen::Index>(r),
                       static_cast<Eigen::Index>(c)) = p.data[r * s + c];
        }
    }
    return out;
}

// Rank-2k view of an operator: ket axes (given ids) then bra axes (id + "*").
inline DenseTensor operator_tensor(const SquareOperator& op,
                                   const std::vector<std::string>& ket_ids) {
    std::vector<Axis> axes;
    axes.reserve(2 * op.space.size());
    for (std::size_t i = 0; i < op.space.size(); ++i) {
        axes.push_back({ket_ids[i], op.space[i].dim});
    }
    for (std::size_t i = 0; i < op.space.size(); ++i) {
        axes.push_back({ket_ids[i] + "*", op.space[i].dim});
    }
    DenseTensor t = DenseTensor::zeros(axes);
    const std::size_t s = op.side();
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            t.data[r * s + c] = op.matrix(static_cast<Eigen::Index>(r),
                                          static_cast<Eigen::Index>(c));
        }
    }
    return t;
}

}  // namespace tn_detail

// Expected factor slots of the operator at vertex v: one per incident edge in
// edge-list order, named by the edge id; a self-loop contributes slots "e"
// and "e!2".
inline std::vector<Factor> vertex_factor_layout(const UndirectedMultigraph& g,
                                                const std::string& v) {
    if (!g.has_vertex(v)) {
        throw Error("vertex_factor_layout: unknown vertex \"" + v + "\"");
    }
    std::vector<Factor> layout;
    for (const UndirectedEdge& e : g.edges()) {
        const std::size_t d = static_cast<std::size_t>(e.dim);
        if (e.u == v && e.v == v) {
            layout.push_back({e.id, d});
            layout.push_back({e.id + "!2", d});
        } else if (e.u == v || e.v == v) {
            layout.push_back({e.id, d});
        }
    }
    return layout;
}

struct TensorNetwork {
    UndirectedMultigraph graph;
    std::map<std::string, SquareOperator> vertex_ops;  // canonical slot order
};

// Validates shapes, positivity (within 1e-9; unnormalized traces are fine),
// and stores each operator with its slots in canonical layout order.
inline TensorNetwork make_tensor_network(
    UndirectedMultigraph graph, std::map<std::string, SquareOperator> ops) {
    if (ops.size() != graph.vertices().size()) {
        for (const auto& [v, op] : ops) {
            (void)op;
            if (!graph.has_vertex(v)) {
                throw Error("tensor network: operator for unknown vertex \"" + v + "\"");
            }
        }
    }
    for (const std::string& v : graph.vertices()) {
        auto it = ops.find(v);
        if (it == ops.end()) {
            throw Error("tensor network: missing operator for vertex \"" + v + "\"");
        }
        const std::vector<Factor> layout = vertex_factor_layout(graph, v);
        if (it->second.space.size() != layout.size()) {
            throw Error("tensor network: operator at \"" + v +
                        "\" has the wrong number of factors");
        }
        it->second = tn_detail::reorder_factors(it->second, layout);
        const SquareOperator& op = it->second;
        if (!op.is_hermitian()) {
            throw NotPSD("tensor network: operator at \"" + v + "\" is not Hermitian");
        }
        if (op.side() > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                op.matrix, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
            if (lo < -kHermTol * std::max(1.0, hi)) {
                throw NotPSD("tensor network: operator at \"" + v +
                             "\" is not positive semidefinite");
            }
        }
    }
    return TensorNetwork{std::move(graph), std::move(ops)};
}

// Rank-1 operator |psi_T><psi_T| of a coefficient tensor; factor slots follow
// the tensor's axes, trace = sum of |T|^2.
inline SquareOperator embed_tensor(const DenseTensor& coeffs) {
    SquareOperator op;
    op.space.reserve(coeffs.rank());
    for (const Axis& a : coeffs.axes) op.space.push_back({a.id, a.dim});
    const Eigen::Index n = static_cast<Eigen::Index>(coeffs.size());
    Eigen::VectorXcd psi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        psi(i) = coeffs.data[static_cast<std::size_t>(i)];
    }
    op.matrix = psi * psi.adjoint();
    return op;
}

// Unnormalized link state: one maximally entangled pair per edge, between the
// edge's two copies; axes in edge-list order.
inline DenseTensor link_state(const TensorNetwork& tn) {
    std::vector<Axis> axes;
    for (const UndirectedEdge& e : tn.graph.edges()) {
        const std::size_t d = static_cast<std::size_t>(e.dim);
        const int second_att = (e.u == e.v) ? 1 : 0;
        axes.push_back({tn_detail::copy_id(e.id, e.u, 0), d});
        axes.push_back({tn_detail::copy_id(e.id, e.v, second_att), d});
    }
    DenseTensor t = DenseTensor::zeros(axes);
    if (axes.empty()) {
        t.data[0] = 1.0;
        return t;
    }
    const std::vector<std::size_t> strides = t.strides();
    const std::size_t m = tn.graph.edges().size();
    std::vector<std::size_t> diag_stride(m), dims(m);
    for (std::size_t k = 0; k < m; ++k) {
        diag_stride[k] = strides[2 * k] + strides[2 * k + 1];
        dims[k] = axes[2 * k].dim;
    }
    std::vector<std::size_t> idx(m, 0);
    std::size_t off = 0;
    for (;;) {
        t.data[off] = 1.0;
        std::size_t k = m;
        for (; k-- > 0;) {
            if (++idx[k] < dims[k]) {
                off += diag_stride[k];
                break;
            }
            off -= diag_stride[k] * (dims[k] - 1);
            idx[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
    }
    return t;
}

// Product of all vertex operators on the doubled space; vertices in sorted-id
// order, copies within a vertex in layout order.
inline SquareOperator total_state(const TensorNetwork& tn) {
    std::vector<std::string> order = tn.graph.vertices();
    std::sort(order.begin(), order.end());
    SquareOperator out = SquareOperator::identity({});
    for (const std::string& v : order) {
        SquareOperator p = tn.vertex_ops.at(v);
        if (p.space != vertex_factor_layout(tn.graph, v)) {
            throw Error("tensor network: operator at \"" + v +
                        "\" does not match the vertex layout; build with "
                        "make_tensor_network");
        }
        const std::vector<std::string> ids = tn_detail::vertex_copy_ids(tn.graph, v);
        for (std::size_t k = 0; k < p.space.size(); ++k) p.space[k].id = ids[k];
        out = tensor_product(out, p);
    }
    return out;
}

namespace tn_detail {

// Vertex tensors and the ket/bra link pairings of the network, shared by
// contract and correlation.  Tensor i corresponds to vertex i in vertex-list
// order; axes are named by copy id (ket) and copy id + "*" (bra).
struct NetworkBody {
    std::vector<DenseTensor> tensors;
    std::map<std::string, int> slot_of;
};

inline NetworkBody network_body(const TensorNetwork& tn) {
    NetworkBody body;
    for (const std::string& v : tn.graph.vertices()) {
        auto it = tn.vertex_ops.find(v);
        if (it == tn.vertex_ops.end()) {
            throw Error("tensor network: missing operator for vertex \"" + v + "\"");
        }
        if (it->second.space != vertex_factor_layout(tn.graph, v)) {
            throw Error("tensor network: operator at \"" + v +
                        "\" does not match the vertex layout; build with "
                        "make_tensor_network");
        }
        body.slot_of[v] = static_cast<int>(body.tensors.size());
        body.tensors.push_back(
            operator_tensor(it->second, vertex_copy_ids(tn.graph, v)));
    }
    return body;
}

}  // namespace tn_detail

// Full contraction <L| rho_P |L>; evaluated pairwise along a planned order,
// never materializing the joint doubled space when the plan can avoid it.
inline double contract(const TensorNetwork& tn) {
    tn_detail::NetworkBody body = tn_detail::network_body(tn);
    std::vector<Pairing> pairings;
    for (const UndirectedEdge& e : tn.graph.edges()) {
        const int iu = body.slot_of.at(e.u);
        const int iw = body.slot_of.at(e.v);
        const std::string cu = tn_detail::copy_id(e.id, e.u, 0);
        const std::string cw = tn_detail::copy_id(e.id, e.v, e.u == e.v ? 1 : 0);
        pairings.push_back({{iu, cu}, {iw, cw}});
        pairings.push_back({{iu, cu + "*"}, {iw, cw + "*"}});
    }
    DenseTensor res = contract_network(body.tensors, pairings);
    if (res.rank() != 0) {
        throw Error("contract: network has unpaired copies");
    }
    const cplx v = res.data[0];
    if (std::abs(v.imag()) > kImagResidueTol * std::max(1.0, std::abs(v.real()))) {
        throw Error("contract: imaginary residue exceeds tolerance");
    }
    return v.real();
}

// Which copy of each region edge carries the inserted operators: 0 is the
// copy at the lexicographically smaller endpoint (a self-loop's first
// attachment), 1 the other.  Missing entries default to 0.
struct CopySelector {
    std::map<std::string, int> copy;
};

// <L| Q1 rho_P Q2 |L> with Q1 applied from the left and Q2 from the right on
// the selected copies.  Q1 and Q2 act on (possibly different) edge subsets;
// each is extended by identity to their union.
inline std::complex<double> correlation(const TensorNetwork& tn,
                                        const SquareOperator& q1,
                                        const SquareOperator& q2,
                                        const CopySelector& placement = {}) {
    // Region: union of the two operators' edges, in edge-list order.
    std::set<std::string> region_ids;
    for (const SquareOperator* q : {&q1, &q2}) {
        for (const Factor& f : q->space) region_ids.insert(f.id);
    }
    std::vector<Factor> region;
    for (const UndirectedEdge& e : tn.graph.edges()) {
        if (region_ids.count(e.id)) {
            region.push_back({e.id, static_cast<std::size_t>(e.dim)});
            region_ids.erase(e.id);
        }
    }
    if (!region_ids.empty()) {
        throw Error("correlation: region references unknown edge \"" +
                    *region_ids.begin() + "\"");
    }
    for (const auto& [eid, which] : placement.copy) {
        if (which != 0 && which != 1) {
            throw Error("correlation: copy selector for edge \"" + eid +
                        "\" must be 0 or 1");
        }
        bool in_region = false;
        for (const Factor& f : region) in_region = in_region || f.id == eid;
        if (!in_region) {
            throw Error("correlation: copy selector for edge \"" + eid +
                        "\" outside the region");
        }
    }

    // Extend both operators by identity to the region, in region order.
    auto extend = [&](const SquareOperator& q) {
        for (const Factor& f : q.space) {
            for (const Factor& r : region) {
                if (r.id == f.id && r.dim != f.dim) {
                    throw Error("correlation: operator dim mismatch on edge \"" +
                                f.id + "\"");
                }
            }
        }
        std::vector<Factor> missing;
        for (const Factor& r : region) {
            if (!q.has_factor(r.id)) missing.push_back(r);
        }
        SquareOperator full =
            missing.empty() ? q : tensor_product(q, SquareOperator::identity(missing));
        return tn_detail::reorder_factors(full, region);
    };
    const SquareOperator f1 = extend(q1);
    const SquareOperator f2 = extend(q2);

    tn_detail::NetworkBody body = tn_detail::network_body(tn);
    std::vector<std::string> q1_ids, q2_ids;
    for (const Factor& r : region) {
        q1_ids.push_back("q1!" + r.id);
        q2_ids.push_back("q2!" + r.id);
    }
    const int slot_q1 = static_cast<int>(body.tensors.size());
    body.tensors.push_back(tn_detail::operator_tensor(f1, q1_ids));
    const int slot_q2 = slot_q1 + 1;
    body.tensors.push_back(tn_detail::operator_tensor(f2, q2_ids));

    std::vector<Pairing> pairings;
    for (const UndirectedEdge& e : tn.graph.edges()) {
        const int iu = body.slot_of.at(e.u);
        const int iw = body.slot_of.at(e.v);
        const bool loop = e.u == e.v;
        std::string c0 = tn_detail::copy_id(e.id, std::min(e.u, e.v), 0);
        std::string c1 = loop ? tn_detail::copy_id(e.id, e.u, 1)
                              : tn_detail::copy_id(e.id, std::max(e.u, e.v), 0);
        const int i0 = loop ? iu : body.slot_of.at(std::min(e.u, e.v));
        const int i1 = loop ? iu : body.slot_of.at(std::max(e.u, e.v));
        (void)iw;

        bool in_region = false;
        for (const Factor& r : region) in_region = in_region || r.id == e.id;
        if (!in_region) {
            pairings.push_back({{i0, c0}, {i1, c1}});
            pairings.push_back({{i0, c0 + "*"}, {i1, c1 + "*"}});
            continue;
        }
        int which = 0;
        auto sel = placement.copy.find(e.id);
        if (sel != placement.copy.end()) which = sel->second;
        // Placed copy p carries the insertions; o is the spectator copy.
        const int ip = which == 0 ? i0 : i1;
        const int io = which == 0 ? i1 : i0;
        const std::string cp = which == 0 ? c0 : c1;
        const std::string co = which == 0 ? c1 : c0;
        // Ket chain through Q1: <L| ties Q1's row to the spectator copy, and
        // Q1's column meets the placed copy of rho_P.
        pairings.push_back({{slot_q1, "q1!" + e.id}, {io, co}});
        pairings.push_back({{slot_q1, "q1!" + e.id + "*"}, {ip, cp}});
        // Bra chain through Q2: rho_P's placed copy meets Q2's row, and Q2's
        // column ties to the spectator copy under |L>.
        pairings.push_back({{ip, cp + "*"}, {slot_q2, "q2!" + e.id}});
        pairings.push_back({{slot_q2, "q2!" + e.id + "*"}, {io, co + "*"}});
    }
    DenseTensor res = contract_network(body.tensors, pairings);
    if (res.rank() != 0) {
        throw Error("correlation: network has unpaired copies");
    }
    return res.data[0];
}

}  // namespace caten
