// SPDX-License-Identifier: MIT
//
// Two-way bridge between tensor networks and causal models.  One direction
// forgets edge orientation and stores each mechanism's Choi matrix as the
// vertex tensor; the other orients every edge by a binary direction string
// and inverts the Choi transform, which succeeds exactly when each tensor's
// out-marginal is maximally mixed on its in-space.  Vertices failing that
// trace condition instead receive an ancilla self-loop carrying an explicitly
// constructed channel whose loop closure reproduces the tensor up to a
// positive bookkeeping constant alpha; enumerating all 2^|E| orientations of
// a network yields its rotation family.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "caten/choi.hpp"
#include "caten/cm.hpp"
#include "caten/errors.hpp"
#include "caten/graphs.hpp"
#include "caten/linalg.hpp"
#include "caten/tn.hpp"

namespace caten {

struct ZeroOperator : Error {
    using Error::Error;
};

struct ZeroTensor : Error {
    using Error::Error;
};

namespace map_detail {

// Reserved ids of the self-loop edges generated at a vertex: the ancilla
// loop, and the padding loop used when the output space is smaller than the
// input space.
inline std::string anc_edge_id(const std::string& v) { return "~anc!" + v; }
inline std::string pad_edge_id(const std::string& v) { return "~pad!" + v; }

// Vertex tensor of one mechanism: its Choi matrix with the primed in-copies
// renamed to plain edge ids.  A self-loop produces both an in- and an
// out-copy of the same edge; the out-copy takes the second-attachment name
// "<edge>!2" so the network layout can tell the two apart.
inline SquareOperator vertex_tensor(const Superoperator& s) {
    SquareOperator choi = tn_detail::reorder_factors(
        s.choi, cm_detail::choi_space(s.in_space, s.out_space));
    std::set<std::string> ins;
    for (const Factor& f : s.in_space) ins.insert(f.id);
    std::vector<Factor> space;
    space.reserve(choi.space.size());
    for (const Factor& f : s.in_space) space.push_back(f);
    for (const Factor& f : s.out_space) {
        space.push_back({ins.count(f.id) ? f.id + "!2" : f.id, f.dim});
    }
    choi.space = std::move(space);
    return choi;
}

inline std::size_t vertex_rank(const UndirectedMultigraph& g, const std::string& v) {
    const auto& vs = g.vertices();
    return static_cast<std::size_t>(
        std::find(vs.begin(), vs.end(), v) - vs.begin());
}

// Orients every edge of an undirected graph: one direction character per
// edge, in edge-list order; '0' points an edge from its lower-ranked
// endpoint (position in the vertex list) to the higher-ranked one, '1' the
// reverse.  Self-loops are insensitive to their character.
inline DirectedCausalGraph oriented_graph(const UndirectedMultigraph& g,
                                          const std::string& directions) {
    if (directions.size() != g.edges().size()) {
        throw Error("oriented_graph: need exactly one direction character per edge");
    }
    std::vector<DirectedVertex> vertices;
    vertices.reserve(g.vertices().size());
    for (const std::string& v : g.vertices()) {
        vertices.push_back({v, VertexKind::Unobserved});
    }
    std::vector<DirectedEdge> edges;
    edges.reserve(g.edges().size());
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const UndirectedEdge& e = g.edges()[i];
        const char c = directions[i];
        if (c != '0' && c != '1') {
            throw Error("oriented_graph: direction string must consist of '0' and '1'");
        }
        const bool u_low = vertex_rank(g, e.u) <= vertex_rank(g, e.v);
        const std::string& lo = u_low ? e.u : e.v;
        const std::string& hi = u_low ? e.v : e.u;
        if (c == '0') {
            edges.push_back({e.id, lo, hi, e.dim});
        } else {
            edges.push_back({e.id, hi, lo, e.dim});
        }
    }
    return DirectedCausalGraph(std::move(vertices), std::move(edges));
}

// A vertex's tensor reordered to in-factors-then-out-factors of the given
// orientation; the resulting matrix doubles as the Choi matrix of the
// candidate mechanism at that vertex.
inline SquareOperator oriented_tensor(const TensorNetwork& tn,
                                      const DirectedCausalGraph& dg,
                                      const std::string& v) {
    std::vector<Factor> target;
    std::set<std::string> ins;
    for (const Factor& f : in_factors(dg, v)) {
        target.push_back(f);
        ins.insert(f.id);
    }
    for (const Factor& f : out_factors(dg, v)) {
        target.push_back({ins.count(f.id) ? f.id + "!2" : f.id, f.dim});
    }
    return tn_detail::reorder_factors(tn.vertex_ops.at(v), target);
}

// Candidate mechanism at a vertex: the inverse Choi transform of its tensor
// under the given orientation.
inline Superoperator candidate_channel(const TensorNetwork& tn,
                                       const DirectedCausalGraph& dg,
                                       const std::string& v) {
    Superoperator s;
    s.in_space = in_factors(dg, v);
    s.out_space = out_factors(dg, v);
    s.choi = oriented_tensor(tn, dg, v);
    s.choi.space = cm_detail::choi_space(s.in_space, s.out_space);
    return s;
}

// Deterministic isometry completion: a d2p x d1 isometry whose column `col`
// is psi and whose remaining columns are Gram-Schmidt residuals of standard
// basis vectors, largest residual first.
inline Eigen::MatrixXcd isometry_through(const Eigen::VectorXcd& psi,
                                         Eigen::Index d1, Eigen::Index col) {
    const Eigen::Index d2p = psi.size();
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(d2p, d1);
    w.col(col) = psi;
    std::vector<Eigen::Index> filled = {col};
    auto project_out = [&](Eigen::VectorXcd r) {
        for (Eigen::Index f : filled) r -= w.col(f) * w.col(f).dot(r);
        return r;
    };
    for (Eigen::Index j = 0; j < d1; ++j) {
        if (j == col) continue;
        Eigen::Index best = 0;
        double best_norm = -1.0;
        for (Eigen::Index t = 0; t < d2p; ++t) {
            const double n = project_out(Eigen::VectorXcd::Unit(d2p, t)).norm();
            if (n > best_norm + 1e-12) {
                best_norm = n;
                best = t;
            }
        }
        // orthogonalize twice for numerical orthonormality
        Eigen::VectorXcd r = project_out(
            project_out(Eigen::VectorXcd::Unit(d2p, best)));
        w.col(j) = r / r.norm();
        filled.push_back(j);
    }
    return w;
}

// Column-decomposition isometry of a nonzero d2 x d1 operator c.  The input
// is S1 (x) ancilla where the ancilla is a copy of S1 tensored with a qubit;
// the output embeds S2 into d2*pad >= d1 dimensions (pad slot 0).  Per input
// basis vector |s>, the ancilla copy is compared against the system, the
// qubit is rotated by the relative column weight a_s when they agree, the
// system value moves into the copy register, and the column direction psi_s
// is emitted through a per-column isometry:
//     v |s>|a,q> = (W_s |a>) (x) |s> (x) (a == s ? R_s |q> : |q>),
// so the unnormalized ancilla Bell sandwich of v equals (2/b) c with b the
// largest column norm of c.
struct IsometryBuild {
    Eigen::MatrixXcd v;   // (d2*pad*2*d1) x (d1*2*d1); out = S2p (x) anc, in = S1 (x) anc
    double b = 0.0;       // largest column norm of c
    std::size_t pad = 1;  // output padding factor
};

inline IsometryBuild build_isometry(const Eigen::MatrixXcd& c) {
    const Eigen::Index d2 = c.rows();
    const Eigen::Index d1 = c.cols();
    IsometryBuild ib;
    ib.pad = (static_cast<std::size_t>(d1) + static_cast<std::size_t>(d2) - 1) /
             static_cast<std::size_t>(d2);
    const Eigen::Index pad = static_cast<Eigen::Index>(ib.pad);
    const Eigen::Index d2p = d2 * pad;
    const Eigen::Index danc = 2 * d1;
    Eigen::VectorXd col_norm(d1);
    for (Eigen::Index j = 0; j < d1; ++j) col_norm(j) = c.col(j).norm();
    ib.b = col_norm.maxCoeff();
    if (ib.b <= 0.0) {
        throw ZeroOperator("build_isometry: zero operator");
    }
    ib.v = Eigen::MatrixXcd::Zero(d2p * danc, d1 * danc);
    for (Eigen::Index s = 0; s < d1; ++s) {
        const double a = col_norm(s) / ib.b;
        const double off = std::sqrt(std::max(0.0, 1.0 - a * a));
        Eigen::Matrix2cd rot;
        rot << a, -off, off, a;
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d2p);
        if (col_norm(s) > 0.0) {
            for (Eigen::Index o = 0; o < d2; ++o) {
                psi(o * pad) = c(o, s) / col_norm(s);
            }
        } else {
            psi(s % d2p) = 1.0;  // free direction: zero columns never fire
        }
        const Eigen::MatrixXcd w = isometry_through(psi, d1, s);
        for (Eigen::Index aa = 0; aa < d1; ++aa) {
            for (Eigen::Index q = 0; q < 2; ++q) {
                for (Eigen::Index qq = 0; qq < 2; ++qq) {
                    const cplx f = aa == s ? rot(qq, q)
                                           : cplx(qq == q ? 1.0 : 0.0);
                    if (f == cplx(0.0)) continue;
                    for (Eigen::Index o = 0; o < d2p; ++o) {
                        if (w(o, aa) == cplx(0.0)) continue;
                        ib.v(o * danc + s * 2 + qq, s * danc + aa * 2 + q) =
                            w(o, aa) * f;
                    }
                }
            }
        }
    }
    return ib;
}

}  // namespace map_detail

// ---------------------------------------------------------------------------
// Causal model -> tensor network.

// Forgets edge directions and represents every mechanism by its Choi matrix:
// unobserved vertices contribute their channel's Choi matrix, observed ones
// the Choi matrix of their outcome-summed instrument.  Opposed directed
// edge pairs become parallel undirected edges; self-loops keep both copies
// on their vertex.
inline TensorNetwork cm_to_tn(const CausalModel& m) {
    std::vector<std::string> vertices;
    vertices.reserve(m.graph.vertices().size());
    for (const DirectedVertex& dv : m.graph.vertices()) vertices.push_back(dv.id);
    std::vector<UndirectedEdge> edges;
    edges.reserve(m.graph.edges().size());
    for (const DirectedEdge& e : m.graph.edges()) {
        edges.push_back({e.id, e.from, e.to, e.dim});
    }
    UndirectedMultigraph g = UndirectedMultigraph::with_generated_ids(
        std::move(vertices), std::move(edges));

    std::map<std::string, SquareOperator> ops;
    for (const DirectedVertex& dv : m.graph.vertices()) {
        if (dv.kind == VertexKind::Unobserved) {
            ops.emplace(dv.id, map_detail::vertex_tensor(m.channels.at(dv.id)));
            continue;
        }
        const Instrument& inst = m.instruments.at(dv.id);
        Superoperator marg;
        marg.in_space = in_factors(m.graph, dv.id);
        marg.out_space = out_factors(m.graph, dv.id);
        const std::vector<Factor> target =
            cm_detail::choi_space(marg.in_space, marg.out_space);
        marg.choi = SquareOperator::zero(target);
        for (const Superoperator& el : inst.elements) {
            marg.choi.matrix += tn_detail::reorder_factors(el.choi, target).matrix;
        }
        ops.emplace(dv.id, map_detail::vertex_tensor(marg));
    }
    return make_tensor_network(std::move(g), std::move(ops));
}

// The direction string recording an existing directed graph's orientations
// relative to its vertex order: '0' when an edge points from a lower-indexed
// vertex to a higher-indexed one (self-loops included), '1' otherwise.
// tn_to_cm(cm_to_tn(m), recorded_directions(m.graph)) rebuilds m.
inline std::string recorded_directions(const DirectedCausalGraph& g) {
    std::string d;
    d.reserve(g.edges().size());
    for (const DirectedEdge& e : g.edges()) {
        d += g.vertex_index(e.from) <= g.vertex_index(e.to) ? '0' : '1';
    }
    return d;
}

// ---------------------------------------------------------------------------
// Tensor network -> causal model, strict form.

// Outcome of orienting a tensor network: either a causal model (every vertex
// tensor satisfies Tr_out(P_v) = I_in / d_in within kHermTol, so the inverse
// Choi transforms are trace preserving), or the list of vertices violating
// that trace condition.
struct TnToCmResult {
    std::optional<CausalModel> model;
    std::vector<std::string> trace_violations;  // vertex ids, vertex-list order

    bool ok() const { return model.has_value(); }
};

inline TnToCmResult tn_to_cm(const TensorNetwork& tn, const std::string& directions) {
    const DirectedCausalGraph dg = map_detail::oriented_graph(tn.graph, directions);
    TnToCmResult res;
    std::map<std::string, Superoperator> channels;
    for (const std::string& v : tn.graph.vertices()) {
        Superoperator s = map_detail::candidate_channel(tn, dg, v);
        if (tp_residual(s) > kHermTol) {
            res.trace_violations.push_back(v);
            continue;
        }
        channels.emplace(v, std::move(s));
    }
    if (!res.trace_violations.empty()) return res;
    res.model = make_causal_model(dg, std::move(channels), {});
    return res;
}

// ---------------------------------------------------------------------------
// Channel from a single linear operator.

// A channel carrying one linear operator c: S1 -> S2 (c != 0) on a system
// plus an ancilla pair (copy of S1 tensored with a qubit, dimension 2*d_in).
// Feeding the ancilla output back into the ancilla input applies c to the
// system on both sides:
//     self_cycle(channel, {{"anc","anc"}}) = c_emb (.) c_emb^dagger / alpha,
// with alpha = (b/2)^2 for b the largest column norm of c.  When
// d_out < d_in the output carries an extra padding factor so the isometry
// has room, and c_emb places the image of c in padding slot 0; pad == 1
// means no padding and c_emb == c.
struct ConstructedChannel {
    Superoperator channel;  // in: {"in","anc"}; out: {"out"[, "pad"], "anc"}
    double alpha = 0.0;
    std::size_t pad = 1;
};

inline ConstructedChannel channel_from_operator(const Eigen::MatrixXcd& c) {
    if (c.size() == 0 || c.cwiseAbs().maxCoeff() <= 0.0) {
        throw ZeroOperator("channel_from_operator: zero operator");
    }
    map_detail::IsometryBuild ib = map_detail::build_isometry(c);
    const std::size_t d1 = static_cast<std::size_t>(c.cols());
    const std::size_t d2 = static_cast<std::size_t>(c.rows());
    const std::size_t danc = 2 * d1;
    std::vector<Factor> in_space = {{"in", d1}, {"anc", danc}};
    std::vector<Factor> out_space;
    out_space.push_back({"out", d2});
    if (ib.pad > 1) out_space.push_back({"pad", ib.pad});
    out_space.push_back({"anc", danc});
    ConstructedChannel cc;
    cc.channel = superoperator_from_kraus({ib.v}, std::move(in_space),
                                          std::move(out_space));
    cc.alpha = (ib.b / 2.0) * (ib.b / 2.0);
    cc.pad = ib.pad;
    return cc;
}

// ---------------------------------------------------------------------------
// Tensor network -> causal model, general form.

// A causal model on the self-loop-augmented graph together with the
// per-vertex constants of the construction.  Vertices passing the trace
// condition keep their plain inverse-Choi channel and alpha 1; marked
// vertices get an ancilla self-loop (dim 2*d_in, id "~anc!<v>"), a padding
// self-loop when d_out < d_in (id "~pad!<v>"), and a channel built from the
// spectral decomposition of their tensor, with
//     self_cycle over the added loops = inverse-Choi(P_v) / alpha_v.
struct GeneralizedMapResult {
    CausalModel model;
    std::map<std::string, double> alphas;  // every vertex; > 0
    std::set<std::string> marked;          // vertices with an added ancilla loop
};

inline GeneralizedMapResult tn_to_cm_general(const TensorNetwork& tn,
                                             const std::string& directions) {
    const DirectedCausalGraph base = map_detail::oriented_graph(tn.graph, directions);
    std::map<std::string, Superoperator> channels;
    std::map<std::string, double> alphas;
    std::set<std::string> marked;
    // loop dims per marked vertex: ancilla dim, padding dim
    std::map<std::string, std::pair<std::size_t, std::size_t>> loops;

    for (const std::string& v : tn.graph.vertices()) {
        Superoperator s = map_detail::candidate_channel(tn, base, v);
        if (s.choi.matrix.cwiseAbs().maxCoeff() <= 0.0) {
            throw ZeroTensor("tn_to_cm_general: zero tensor at vertex '" + v + "'");
        }
        if (tp_residual(s) <= kHermTol) {
            channels.emplace(v, std::move(s));
            alphas.emplace(v, 1.0);
            continue;
        }
        marked.insert(v);
        const auto d1 = static_cast<Eigen::Index>(s.d_in());
        const auto d2 = static_cast<Eigen::Index>(s.d_out());
        const Eigen::Index danc = 2 * d1;

        // spectral terms: one isometry per retained eigenvector
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.choi.matrix);
        const double floor = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
        struct Term {
            double weight = 0.0;  // eigenvalue * (b/2)^2
            Eigen::MatrixXcd v;
        };
        std::vector<Term> terms;
        Eigen::Index pad = 1;
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const double mu = es.eigenvalues()(k);
            if (mu <= floor) continue;
            Eigen::MatrixXcd ck(d2, d1);
            const double scale = 1.0 / std::sqrt(static_cast<double>(d1));
            for (Eigen::Index i = 0; i < d1; ++i) {
                for (Eigen::Index j = 0; j < d2; ++j) {
                    ck(j, i) = scale * es.eigenvectors()(i * d2 + j, k);
                }
            }
            map_detail::IsometryBuild ib = map_detail::build_isometry(ck);
            pad = static_cast<Eigen::Index>(ib.pad);
            const double beta = ib.b / 2.0;
            terms.push_back({mu * beta * beta, std::move(ib.v)});
        }
        if (terms.empty()) {
            throw ZeroTensor("tn_to_cm_general: zero tensor at vertex '" + v + "'");
        }
        double gamma = 0.0;
        for (const Term& t : terms) gamma += t.weight;
        alphas.emplace(v, static_cast<double>(d1 * d1) * gamma);
        loops.emplace(v, std::make_pair(static_cast<std::size_t>(danc),
                                        static_cast<std::size_t>(pad)));

        // Kraus family on the augmented boundary [ins, anc, pad] ->
        // [outs, anc, pad]: the incoming padding copy is traced out, the
        // outgoing one carries the embedding slack.
        const Eigen::Index d2p = d2 * pad;
        std::vector<Eigen::MatrixXcd> kraus;
        kraus.reserve(terms.size() * static_cast<std::size_t>(pad));
        for (const Term& t : terms) {
            const double scale = std::sqrt(t.weight / gamma);
            for (Eigen::Index m = 0; m < pad; ++m) {
                Eigen::MatrixXcd kk =
                    Eigen::MatrixXcd::Zero(d2 * danc * pad, d1 * danc * pad);
                for (Eigen::Index o = 0; o < d2p; ++o) {
                    const Eigen::Index s2 = o / pad;
                    const Eigen::Index pout = o % pad;
                    for (Eigen::Index aq2 = 0; aq2 < danc; ++aq2) {
                        for (Eigen::Index s1 = 0; s1 < d1; ++s1) {
                            for (Eigen::Index aq1 = 0; aq1 < danc; ++aq1) {
                                const cplx val = t.v(o * danc + aq2, s1 * danc + aq1);
                                if (val == cplx(0.0)) continue;
                                kk((s2 * danc + aq2) * pad + pout,
                                   (s1 * danc + aq1) * pad + m) = scale * val;
                            }
                        }
                    }
                }
                kraus.push_back(std::move(kk));
            }
        }
        std::vector<Factor> in_space = s.in_space;
        in_space.push_back({map_detail::anc_edge_id(v), static_cast<std::size_t>(danc)});
        std::vector<Factor> out_space = s.out_space;
        out_space.push_back({map_detail::anc_edge_id(v), static_cast<std::size_t>(danc)});
        if (pad > 1) {
            in_space.push_back({map_detail::pad_edge_id(v), static_cast<std::size_t>(pad)});
            out_space.push_back({map_detail::pad_edge_id(v), static_cast<std::size_t>(pad)});
        }
        channels.emplace(v, superoperator_from_kraus(kraus, std::move(in_space),
                                                     std::move(out_space)));
    }

    std::vector<DirectedVertex> vertices = base.vertices();
    std::vector<DirectedEdge> edges = base.edges();
    for (const std::string& v : tn.graph.vertices()) {
        if (!marked.count(v)) continue;
        const auto& [danc, pad] = loops.at(v);
        edges.push_back({map_detail::anc_edge_id(v), v, v, static_cast<int>(danc)});
        if (pad > 1) {
            edges.push_back({map_detail::pad_edge_id(v), v, v, static_cast<int>(pad)});
        }
    }
    // The channels are positive by construction (plain inverse-Choi tensors of
    // PSD vertex operators, or sums of vectorized-Kraus rank-one terms), so
    // assembly skips the spectral CP check; trace preservation, factor
    // canonicalization, and graph coverage are still verified.
    return GeneralizedMapResult{
        cm_detail::assemble_model(DirectedCausalGraph(std::move(vertices), std::move(edges)),
                                  std::move(channels), {}, false),
        std::move(alphas), std::move(marked)};
}

// Largest absolute deviation of the loop-closure identity at one vertex of a
// generalized mapping: closing the vertex's added self-loops must reproduce
// its network tensor, read as a Choi matrix for the same orientation, scaled
// by 1/alpha_v.  Unmarked vertices compare the channel directly.
inline double closure_residual(const GeneralizedMapResult& r,
                               const TensorNetwork& tn,
                               const std::string& directions,
                               const std::string& v) {
    const DirectedCausalGraph base = map_detail::oriented_graph(tn.graph, directions);
    const Superoperator want = map_detail::candidate_channel(tn, base, v);
    const Superoperator& ch = r.model.channels.at(v);
    Superoperator closed = ch;
    if (r.marked.count(v)) {
        std::vector<std::pair<std::string, std::string>> pairs;
        pairs.emplace_back(map_detail::anc_edge_id(v), map_detail::anc_edge_id(v));
        for (const Factor& f : ch.in_space) {
            if (f.id == map_detail::pad_edge_id(v)) {
                pairs.emplace_back(f.id, f.id);
            }
        }
        closed = self_cycle(ch, pairs);
    }
    const SquareOperator got =
        tn_detail::reorder_factors(closed.choi, want.choi.space);
    return (got.matrix - want.choi.matrix / r.alphas.at(v)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Rotation family: every orientation of a network.

// Lazy enumeration of the generalized mappings of all 2^|E| direction
// strings; edge i of member k takes direction bit (k >> i) & 1.  Members are
// computed on demand and independently.
class RotationFamily {
  public:
    static constexpr std::size_t kMaxEdges = 16;

    struct Entry {
        std::string directions;
        GeneralizedMapResult result;
    };

    explicit RotationFamily(TensorNetwork tn) : tn_(std::move(tn)) {
        const std::size_t n = tn_.graph.edges().size();
        if (n > kMaxEdges) {
            throw TooManyEdges("rotation_family: " + std::to_string(n) +
                               " edges exceed the enumeration budget of " +
                               std::to_string(kMaxEdges));
        }
        size_ = static_cast<std::size_t>(1) << n;
    }

    std::size_t size() const { return size_; }
    const TensorNetwork& network() const { return tn_; }

    std::string directions(std::size_t k) const {
        std::string d(tn_.graph.edges().size(), '0');
        for (std::size_t i = 0; i < d.size(); ++i) {
            if ((k >> i) & 1u) d[i] = '1';
        }
        return d;
    }

    GeneralizedMapResult member(std::size_t k) const {
        return tn_to_cm_general(tn_, directions(k));
    }

    Entry entry(std::size_t k) const { return {directions(k), member(k)}; }

    class iterator {
      public:
        iterator(const RotationFamily* fam, std::size_t k) : fam_(fam), k_(k) {}
        Entry operator*() const { return fam_->entry(k_); }
        iterator& operator++() {
            ++k_;
            return *this;
        }
        bool operator==(const iterator& o) const { return k_ == o.k_; }
        bool operator!=(const iterator& o) const { return !(*this == o); }

      private:
        const RotationFamily* fam_;
        std::size_t k_ = 0;
    };

    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, size_}; }

  private:
    TensorNetwork tn_;
    std::size_t size_ = 0;
};

inline RotationFamily rotation_family(TensorNetwork tn) {
    return RotationFamily(std::move(tn));
}

}  // namespace caten
