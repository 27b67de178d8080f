// SPDX-License-Identifier: MIT
//
// Dense complex tensor algebra and contraction planning.
//
// DenseTensor is a named-axis, row-major complex array; SquareOperator is a
// square matrix living on an ordered list of (factor, dim) slots.  On top of
// those, this header provides the tensor product, partial trace, maximally
// entangled vectors, the PSD square root, and a pairwise tensor-network
// contraction engine with an exhaustive-then-greedy order planner.

#pragma once

#include <algorithm>
#include <bitset>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "caten/errors.hpp"

namespace caten {

using cplx = std::complex<double>;

inline constexpr double kHermTol = 1e-9;   // hermiticity / PSD flag tolerance
inline constexpr double kEvalClip = -1e-10; // eigenvalue clip floor

// ---------------------------------------------------------------------------
// DenseTensor

struct Axis {
    std::string id;
    std::size_t dim = 0;

    friend bool operator==(const Axis& a, const Axis& b) {
        return a.id == b.id && a.dim == b.dim;
    }
};

struct DenseTensor {
    std::vector<Axis> axes;       // ordered; ids unique within the tensor
    std::vector<cplx> data;       // row-major over `axes`

    static DenseTensor zeros(std::vector<Axis> ax) {
        DenseTensor t;
        std::size_t n = 1;
        for (const auto& a : ax) n *= a.dim;
        t.axes = std::move(ax);
        t.data.assign(n, cplx(0.0));
        return t;
    }

    static DenseTensor scalar(cplx v) {
        DenseTensor t;
        t.data.assign(1, v);
        return t;
    }

    std::size_t rank() const { return axes.size(); }
    std::size_t size() const { return data.size(); }

    std::size_t axis_index(const std::string& id) const {
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (axes[i].id == id) return i;
        throw Error("DenseTensor: unknown axis '" + id + "'");
    }

    // Row-major strides, innermost axis last.
    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(axes.size(), 1);
        for (std::size_t i = axes.size(); i-- > 1;)
            s[i - 1] = s[i] * axes[i].dim;
        return s;
    }

    std::size_t offset(const std::vector<std::size_t>& idx) const {
        std::size_t off = 0, stride = 1;
        for (std::size_t i = axes.size(); i-- > 0;) {
            off += idx[i] * stride;
            stride *= axes[i].dim;
        }
        return off;
    }

    cplx& at(const std::vector<std::size_t>& idx) { return data[offset(idx)]; }
    const cplx& at(const std::vector<std::size_t>& idx) const { return data[offset(idx)]; }

    // Tensor with axes rearranged into `order` (a permutation of axis ids).
    DenseTensor permuted(const std::vector<std::string>& order) const {
        if (order.size() != axes.size())
            throw Error("DenseTensor: permutation size mismatch");
        std::vector<std::size_t> src_of(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) src_of[k] = axis_index(order[k]);

        DenseTensor out;
        out.axes.reserve(axes.size());
        for (std::size_t s : src_of) out.axes.push_back(axes[s]);
        out.data.resize(data.size());

        const std::vector<std::size_t> sstr = strides();
        std::vector<std::size_t> dstr_in_src(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) dstr_in_src[k] = sstr[src_of[k]];

        std::vector<std::size_t> idx(order.size(), 0);
        std::size_t src_off = 0;
        for (std::size_t dst = 0; dst < out.data.size(); ++dst) {
            out.data[dst] = data[src_off];
            // odometer over destination indices, tracking the source offset
            for (std::size_t k = order.size(); k-- > 0;) {
                if (++idx[k] < out.axes[k].dim) {
                    src_off += dstr_in_src[k];
                    break;
                }
                src_off -= dstr_in_src[k] * (out.axes[k].dim - 1);
                idx[k] = 0;
            }
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// SquareOperator

struct Factor {
    std::string id;
    std::size_t dim = 0;

    friend bool operator==(const Factor& a, const Factor& b) {
        return a.id == b.id && a.dim == b.dim;
    }
};

inline std::size_t space_dim(const std::vector<Factor>& space) {
    std::size_t d = 1;
    for (const auto& f : space) d *= f.dim;
    return d;
}

struct SquareOperator {
    std::vector<Factor> space;   // ordered factor slots
    Eigen::MatrixXcd matrix;     // side == product of factor dims

    static SquareOperator identity(std::vector<Factor> space) {
        SquareOperator op;
        std::size_t d = space_dim(space);
        op.space = std::move(space);
        op.matrix = Eigen::MatrixXcd::Identity(d, d);
        return op;
    }

    static SquareOperator zero(std::vector<Factor> space) {
        SquareOperator op;
        std::size_t d = space_dim(space);
        op.space = std::move(space);
        op.matrix = Eigen::MatrixXcd::Zero(d, d);
        return op;
    }

    std::size_t side() const { return static_cast<std::size_t>(matrix.rows()); }

    std::size_t factor_index(const std::string& id) const {
        for (std::size_t i = 0; i < space.size(); ++i)
            if (space[i].id == id) return i;
        throw Error("SquareOperator: unknown factor '" + id + "'");
    }

    bool has_factor(const std::string& id) const {
        return std::any_of(space.begin(), space.end(),
                           [&](const Factor& f) { return f.id == id; });
    }

    bool is_hermitian(double tol = kHermTol) const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    cplx trace() const { return matrix.trace(); }
};

struct NotPSD : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Operator algebra

// Composite operator on a's factors followed by b's factors (Kronecker product).
inline SquareOperator tensor_product(const SquareOperator& a, const SquareOperator& b) {
    for (const auto& f : b.space)
        if (a.has_factor(f.id))
            throw Error("tensor_product: duplicate factor '" + f.id + "'");
    SquareOperator out;
    out.space = a.space;
    out.space.insert(out.space.end(), b.space.begin(), b.space.end());
    const auto ra = a.matrix.rows(), rb = b.matrix.rows();
    out.matrix.resize(ra * rb, ra * rb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index j = 0; j < ra; ++j)
            out.matrix.block(i * rb, j * rb, rb, rb) = a.matrix(i, j) * b.matrix;
    return out;
}

// Trace out every factor not in `keep`; kept factors preserve their order.
inline SquareOperator partial_trace(const SquareOperator& m,
                                    const std::vector<std::string>& keep) {
    std::vector<std::size_t> keep_idx, drop_idx;
    for (const auto& id : keep) keep_idx.push_back(m.factor_index(id)); // throws on unknown
    std::sort(keep_idx.begin(), keep_idx.end());
    keep_idx.erase(std::unique(keep_idx.begin(), keep_idx.end()), keep_idx.end());
    for (std::size_t i = 0; i < m.space.size(); ++i)
        if (!std::binary_search(keep_idx.begin(), keep_idx.end(), i)) drop_idx.push_back(i);

    std::vector<std::size_t> dims(m.space.size());
    std::vector<std::size_t> strides(m.space.size(), 1);
    for (std::size_t i = 0; i < m.space.size(); ++i) dims[i] = m.space[i].dim;
    for (std::size_t i = m.space.size(); i-- > 1;) strides[i - 1] = strides[i] * dims[i];

    std::size_t dk = 1, dd = 1;
    for (std::size_t i : keep_idx) dk *= dims[i];
    for (std::size_t i : drop_idx) dd *= dims[i];

    SquareOperator out;
    for (std::size_t i : keep_idx) out.space.push_back(m.space[i]);
    out.matrix = Eigen::MatrixXcd::Zero(dk, dk);

    // decompose a kept linear index into an offset in the full space
    auto unrank = [](std::size_t lin, const std::vector<std::size_t>& dims_sel,
                     const std::vector<std::size_t>& strides_sel) {
        std::size_t off = 0;
        for (std::size_t i = dims_sel.size(); i-- > 0;) {
            off += (lin % dims_sel[i]) * strides_sel[i];
            lin /= dims_sel[i];
        }
        return off;
    };
    std::vector<std::size_t> kdims, kstr, ddims, dstr;
    for (std::size_t i : keep_idx) kdims.push_back(dims[i]), kstr.push_back(strides[i]);
    for (std::size_t i : drop_idx) ddims.push_back(dims[i]), dstr.push_back(strides[i]);

    for (std::size_t r = 0; r < dk; ++r) {
        std::size_t roff = unrank(r, kdims, kstr);
        for (std::size_t c = 0; c < dk; ++c) {
            std::size_t coff = unrank(c, kdims, kstr);
            cplx sum = 0.0;
            for (std::size_t t = 0; t < dd; ++t) {
                std::size_t toff = unrank(t, ddims, dstr);
                sum += m.matrix(static_cast<Eigen::Index>(roff + toff),
                                static_cast<Eigen::Index>(coff + toff));
            }
            out.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sum;
        }
    }
    return out;
}

// Vector sum_i |ii> on two axes of dimension d, divided by sqrt(d) when
// `normalized`.  Axis ids default to "0", "1".
inline DenseTensor max_entangled(std::size_t d, bool normalized,
                                 const std::string& id0 = "0",
                                 const std::string& id1 = "1") {
    if (d < 1) throw Error("max_entangled: dimension must be positive");
    DenseTensor t = DenseTensor::zeros({{id0, d}, {id1, d}});
    const double amp = normalized ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
    for (std::size_t i = 0; i < d; ++i) t.data[i * d + i] = amp;
    return t;
}

// Hermitian PSD square root.  Eigenvalues in [-1e-10, 0) are clipped to zero;
// anything below the floor raises NotPSD.
inline SquareOperator psd_sqrt(const SquareOperator& m) {
    if (!m.is_hermitian())
        throw Error("psd_sqrt: matrix is not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.matrix);
    Eigen::VectorXd evals = es.eigenvalues();
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (evals(i) < kEvalClip)
            throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(evals(i)) +
                         " below the PSD floor");
        if (evals(i) < 0.0) evals(i) = 0.0;
    }
    SquareOperator out;
    out.space = m.space;
    out.matrix = es.eigenvectors() * evals.cwiseSqrt().asDiagonal() *
                 es.eigenvectors().adjoint();
    return out;
}

// ---------------------------------------------------------------------------
// Contraction planning

struct NodeStubs {
    std::string id;
    std::vector<std::string> edges; // incident edge ids; self-pairings listed twice
};

// Sequence of pairwise merges.  Step k merges slots (a, b) into a new slot
// with index (initial node count + k).
using ContractionStep = std::pair<int, int>;
using ContractionOrder = std::vector<ContractionStep>;

namespace detail {

inline constexpr std::size_t kMaxPlannedEdges = 256;

struct PlannerGraph {
    std::size_t n = 0;
    std::vector<std::string> edge_ids;
    std::vector<double> edge_dim;
    std::vector<std::pair<int, int>> endpoints; // per edge, the two node slots
};

inline PlannerGraph build_planner_graph(const std::vector<NodeStubs>& nodes,
                                        const std::map<std::string, std::size_t>& edge_dims) {
    PlannerGraph g;
    g.n = nodes.size();
    std::map<std::string, std::vector<int>> stubs;
    for (std::size_t v = 0; v < nodes.size(); ++v)
        for (const auto& e : nodes[v].edges) stubs[e].push_back(static_cast<int>(v));
    for (const auto& [id, owners] : stubs) {
        if (owners.size() != 2)
            throw Error("plan_contraction_order: dangling edge '" + id + "'");
        auto it = edge_dims.find(id);
        if (it == edge_dims.end())
            throw Error("plan_contraction_order: no dimension for edge '" + id + "'");
        if (owners[0] == owners[1]) continue; // self-pairing: traced inside the node
        g.edge_ids.push_back(id);
        g.edge_dim.push_back(static_cast<double>(it->second));
        g.endpoints.emplace_back(owners[0], owners[1]);
    }
    return g;
}

// Optimal contraction tree by dynamic programming over node subsets,
// minimizing the total multiply count.
inline ContractionOrder plan_exhaustive(const PlannerGraph& g) {
    const std::size_t n = g.n;
    const std::size_t m = g.edge_ids.size();
    using EdgeSet = std::bitset<kMaxPlannedEdges>;

    // stub(S): edges with exactly one endpoint inside S
    std::vector<EdgeSet> stub(1u << n);
    std::vector<double> stub_size(1u << n, 1.0);
    for (std::size_t s = 1; s < (1u << n); ++s) {
        EdgeSet es;
        double sz = 1.0;
        for (std::size_t e = 0; e < m; ++e) {
            bool a = (s >> g.endpoints[e].first) & 1u;
            bool b = (s >> g.endpoints[e].second) & 1u;
            if (a != b) {
                es.set(e);
                sz *= g.edge_dim[e];
            }
        }
        stub[s] = es;
        stub_size[s] = sz;
    }

    constexpr double kInf = 1e300;
    std::vector<double> best(1u << n, kInf);
    std::vector<std::uint32_t> choice(1u << n, 0);
    for (std::size_t v = 0; v < n; ++v) best[1u << v] = 0.0;

    for (std::size_t s = 1; s < (1u << n); ++s) {
        if (best[s] < kInf) continue; // singleton
        std::size_t low = s & (~s + 1);
        for (std::size_t t = (s - 1) & s; t; t = (t - 1) & s) {
            if (!(t & low)) continue; // canonical split: t holds the lowest node
            std::size_t u = s ^ t;
            if (best[t] >= kInf || best[u] >= kInf) continue;
            // multiplies for merging t and u: product over the union of stubs
            double cost = 1.0;
            EdgeSet uni = stub[t] | stub[u];
            for (std::size_t e = 0; e < m; ++e)
                if (uni.test(e)) cost *= g.edge_dim[e];
            double total = best[t] + best[u] + cost;
            if (total < best[s]) {
                best[s] = total;
                choice[s] = static_cast<std::uint32_t>(t);
            }
        }
    }

    ContractionOrder order;
    int next_slot = static_cast<int>(n);
    // emit merges bottom-up; disconnected components are folded left-to-right
    std::vector<std::size_t> components;
    std::vector<char> seen(n, 0);
    // whole-graph subset; DP above covers arbitrary subsets including
    // disconnected ones (outer products), so a single call suffices
    auto emit = [&](auto&& self, std::size_t s) -> int {
        if ((s & (s - 1)) == 0) { // singleton
            int v = 0;
            while (!((s >> v) & 1u)) ++v;
            return v;
        }
        int a = self(self, choice[s]);
        int b = self(self, s ^ choice[s]);
        order.emplace_back(a, b);
        return next_slot++;
    };
    (void)components;
    (void)seen;
    emit(emit, (1u << n) - 1);
    return order;
}

// Greedy fallback: repeatedly merge the adjacent pair whose result tensor is
// smallest; ties break on slot indices, so the plan is deterministic.
inline ContractionOrder plan_greedy(const PlannerGraph& g) {
    const std::size_t n = g.n;
    std::vector<std::optional<std::map<int, double>>> stubs(n); // edge -> dim
    for (std::size_t v = 0; v < n; ++v) stubs[v].emplace();
    for (std::size_t e = 0; e < g.edge_ids.size(); ++e) {
        (*stubs[g.endpoints[e].first])[static_cast<int>(e)] = g.edge_dim[e];
        (*stubs[g.endpoints[e].second])[static_cast<int>(e)] = g.edge_dim[e];
    }

    ContractionOrder order;
    std::size_t live = n;
    while (live > 1) {
        double best_size = 1e300;
        bool best_adjacent = false;
        int bi = -1, bj = -1;
        for (std::size_t i = 0; i < stubs.size(); ++i) {
            if (!stubs[i]) continue;
            for (std::size_t j = i + 1; j < stubs.size(); ++j) {
                if (!stubs[j]) continue;
                double size = 1.0;
                bool adjacent = false;
                for (const auto& [e, d] : *stubs[i]) {
                    if (stubs[j]->count(e)) adjacent = true;
                    else size *= d;
                }
                for (const auto& [e, d] : *stubs[j])
                    if (!stubs[i]->count(e)) size *= d;
                // prefer adjacent pairs; among those, the smallest result
                if (std::make_tuple(!adjacent, size) <
                    std::make_tuple(!best_adjacent, best_size)) {
                    best_adjacent = adjacent;
                    best_size = size;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        std::map<int, double> merged;
        for (const auto& [e, d] : *stubs[bi])
            if (!stubs[bj]->count(e)) merged[e] = d;
        for (const auto& [e, d] : *stubs[bj])
            if (!stubs[bi]->count(e)) merged[e] = d;
        stubs[bi].reset();
        stubs[bj].reset();
        stubs.push_back(std::move(merged));
        order.emplace_back(bi, bj);
        --live;
    }
    return order;
}

} // namespace detail

inline constexpr std::size_t kExhaustivePlannerLimit = 12;

// Binary contraction tree over the nodes.  Exhaustive-optimal (total multiply
// count) up to 12 nodes, greedy min-intermediate-size beyond; deterministic
// for a fixed input ordering.
inline ContractionOrder plan_contraction_order(
    const std::vector<NodeStubs>& nodes,
    const std::map<std::string, std::size_t>& edge_dims) {
    detail::PlannerGraph g = detail::build_planner_graph(nodes, edge_dims);
    if (g.n <= 1) return {};
    if (g.n <= kExhaustivePlannerLimit && g.edge_ids.size() <= detail::kMaxPlannedEdges)
        return detail::plan_exhaustive(g);
    return detail::plan_greedy(g);
}

// Entry count of the largest intermediate tensor the plan produces
// (exact for closed networks, where every tensor axis is an edge stub).
inline double plan_peak_intermediate(const std::vector<NodeStubs>& nodes,
                                     const std::map<std::string, std::size_t>& edge_dims,
                                     const ContractionOrder& order) {
    detail::PlannerGraph g = detail::build_planner_graph(nodes, edge_dims);
    std::vector<std::optional<std::map<int, double>>> stubs(g.n);
    for (std::size_t v = 0; v < g.n; ++v) stubs[v].emplace();
    for (std::size_t e = 0; e < g.edge_ids.size(); ++e) {
        (*stubs[g.endpoints[e].first])[static_cast<int>(e)] = g.edge_dim[e];
        (*stubs[g.endpoints[e].second])[static_cast<int>(e)] = g.edge_dim[e];
    }
    double peak = 1.0;
    for (const auto& [a, b] : order) {
        std::map<int, double> merged;
        double size = 1.0;
        for (const auto& [e, d] : *stubs[a])
            if (!stubs[b]->count(e)) merged[e] = d, size *= d;
        for (const auto& [e, d] : *stubs[b])
            if (!stubs[a]->count(e)) merged[e] = d, size *= d;
        stubs[a].reset();
        stubs[b].reset();
        stubs.push_back(std::move(merged));
        peak = std::max(peak, size);
    }
    return peak;
}

// ---------------------------------------------------------------------------
// Contraction execution

struct AxisRef {
    int tensor = 0;      // index into the tensor list passed to contract_network
    std::string axis;    // axis id within that tensor
};

using Pairing = std::pair<AxisRef, AxisRef>;

namespace detail {

// Trace over pairs of axes within one tensor (used for self-pairings).
inline DenseTensor trace_pairs(const DenseTensor& t,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<char> paired(t.rank(), 0);
    for (const auto& [a, b] : pairs) {
        if (t.axes[a].dim != t.axes[b].dim)
            throw Error("contract_network: dimension mismatch on a pairing");
        paired[a] = paired[b] = 1;
    }
    DenseTensor out;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (!paired[i]) out.axes.push_back(t.axes[i]);
    std::size_t out_size = 1;
    for (const auto& a : out.axes) out_size *= a.dim;
    out.data.assign(out_size, cplx(0.0));

    const auto str = t.strides();
    std::vector<std::size_t> free_idx, free_dim, free_str;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (!paired[i]) free_dim.push_back(t.axes[i].dim), free_str.push_back(str[i]);

    // iterate the free odometer; for each setting sum the joint diagonal
    std::vector<std::size_t> fidx(free_dim.size(), 0);
    std::size_t base = 0;
    for (std::size_t dst = 0; dst < out.data.size(); ++dst) {
        cplx sum = 0.0;
        std::vector<std::size_t> didx(pairs.size(), 0);
        std::size_t doff = 0;
        bool done = false;
        while (!done) {
            sum += t.data[base + doff];
            done = true;
            for (std::size_t k = pairs.size(); k-- > 0;) {
                std::size_t stride = str[pairs[k].first] + str[pairs[k].second];
                if (++didx[k] < t.axes[pairs[k].first].dim) {
                    doff += stride;
                    done = false;
                    break;
                }
                doff -= stride * (t.axes[pairs[k].first].dim - 1);
                didx[k] = 0;
            }
            if (pairs.empty()) break;
        }
        out.data[dst] = sum;
        for (std::size_t k = free_dim.size(); k-- > 0;) {
            if (++fidx[k] < free_dim[k]) {
                base += free_str[k];
                break;
            }
            base -= free_str[k] * (free_dim[k] - 1);
            fidx[k] = 0;
        }
    }
    return out;
}

// Contract tensors a and b over the given (axis-of-a, axis-of-b) pairs via a
// permute + GEMM; result axes are a's free axes then b's free axes.
inline DenseTensor contract_pair(const DenseTensor& a, const DenseTensor& b,
                                 const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<char> a_shared(a.rank(), 0), b_shared(b.rank(), 0);
    std::vector<std::string> a_order, b_order;
    double shared_dim = 1.0;
    for (const auto& [ai, bi] : pairs) {
        std::size_t ia = a.axis_index(ai), ib = b.axis_index(bi);
        if (a.axes[ia].dim != b.axes[ib].dim)
            throw Error("contract_network: dimension mismatch on a pairing");
        a_shared[ia] = 1;
        b_shared[ib] = 1;
        shared_dim *= static_cast<double>(a.axes[ia].dim);
    }
    DenseTensor out;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!a_shared[i]) a_order.push_back(a.axes[i].id), out.axes.push_back(a.axes[i]);
    for (const auto& [ai, bi] : pairs) a_order.push_back(ai);
    for (const auto& [ai, bi] : pairs) b_order.push_back(bi);
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (!b_shared[i]) b_order.push_back(b.axes[i].id), out.axes.push_back(b.axes[i]);

    DenseTensor pa = a.permuted(a_order);
    DenseTensor pb = b.permuted(b_order);
    const std::size_t k = static_cast<std::size_t>(shared_dim + 0.5);
    const std::size_t ra = pa.size() / k, cb = pb.size() / k;

    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> ma(pa.data.data(), static_cast<Eigen::Index>(ra),
                                static_cast<Eigen::Index>(k));
    Eigen::Map<const RowMat> mb(pb.data.data(), static_cast<Eigen::Index>(k),
                                static_cast<Eigen::Index>(cb));
    RowMat mc = ma * mb;

    out.data.assign(mc.data(), mc.data() + mc.size());
    return out;
}

} // namespace detail

// Execute a pairwise contraction over the network.  Free axes survive into the
// result in sorted-id order; the value is independent of the order choice.
inline DenseTensor contract_network(const std::vector<DenseTensor>& tensors,
                                    const std::vector<Pairing>& pairings,
                                    const ContractionOrder& order) {
    const int n = static_cast<int>(tensors.size());
    if (n == 0) return DenseTensor::scalar(1.0);

    // validate references and collect, per tensor, its self-pairings
    auto check_ref = [&](const AxisRef& r) {
        if (r.tensor < 0 || r.tensor >= n)
            throw Error("contract_network: pairing references tensor out of range");
        (void)tensors[static_cast<std::size_t>(r.tensor)].axis_index(r.axis);
    };
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> self_pairs(tensors.size());
    // cross pairings keyed by (tensor, axis) on both sides
    std::vector<Pairing> cross;
    for (const auto& p : pairings) {
        check_ref(p.first);
        check_ref(p.second);
        if (p.first.tensor == p.second.tensor) {
            const auto& t = tensors[static_cast<std::size_t>(p.first.tensor)];
            self_pairs[static_cast<std::size_t>(p.first.tensor)].emplace_back(
                t.axis_index(p.first.axis), t.axis_index(p.second.axis));
        } else {
            cross.push_back(p);
        }
    }

    // live slots; self-pairings are traced out up front
    std::vector<std::optional<DenseTensor>> slot(tensors.size());
    // where each original (tensor, axis) currently lives: slot index, axis id
    std::map<std::pair<int, std::string>, std::pair<int, std::string>> where;
    for (int i = 0; i < n; ++i) {
        // give axes slot-unique names so identical ids across tensors cannot clash
        DenseTensor renamed = tensors[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < renamed.axes.size(); ++k) {
            std::string fresh = "t" + std::to_string(i) + "\x1f" + renamed.axes[k].id;
            where[{i, renamed.axes[k].id}] = {i, fresh};
            renamed.axes[k].id = fresh;
        }
        if (!self_pairs[static_cast<std::size_t>(i)].empty())
            renamed = detail::trace_pairs(renamed, self_pairs[static_cast<std::size_t>(i)]);
        slot[static_cast<std::size_t>(i)] = std::move(renamed);
    }

    auto live_slot_of = [&](const AxisRef& r) {
        return where.at({r.tensor, r.axis});
    };

    std::vector<char> consumed(cross.size(), 0);
    auto merge = [&](int a, int b) {
        if (a == b || !slot[static_cast<std::size_t>(a)] || !slot[static_cast<std::size_t>(b)])
            throw Error("contract_network: order references a dead slot");
        std::vector<std::pair<std::string, std::string>> pairs;
        for (std::size_t k = 0; k < cross.size(); ++k) {
            if (consumed[k]) continue;
            auto [sa, ida] = live_slot_of(cross[k].first);
            auto [sb, idb] = live_slot_of(cross[k].second);
            if (sa == a && sb == b) pairs.emplace_back(ida, idb);
            else if (sa == b && sb == a) pairs.emplace_back(idb, ida);
            else continue;
            consumed[k] = 1;
        }
        DenseTensor merged = detail::contract_pair(*slot[static_cast<std::size_t>(a)],
                                                   *slot[static_cast<std::size_t>(b)], pairs);
        slot[static_cast<std::size_t>(a)].reset();
        slot[static_cast<std::size_t>(b)].reset();
        int idx = static_cast<int>(slot.size());
        slot.push_back(std::move(merged));
        for (auto& [orig, loc] : where)
            if (loc.first == a || loc.first == b) loc.first = idx;
        return idx;
    };

    for (const auto& [a, b] : order) {
        if (a < 0 || b < 0 || a >= static_cast<int>(slot.size()) ||
            b >= static_cast<int>(slot.size()))
            throw Error("contract_network: order references an invalid slot");
        merge(a, b);
    }
    // fold any remaining live slots (empty order, disconnected leftovers)
    int first = -1;
    for (std::size_t i = 0; i < slot.size(); ++i) {
        if (!slot[i]) continue;
        if (first < 0) {
            first = static_cast<int>(i);
        } else {
            first = merge(first, static_cast<int>(i));
            // merge() may consume pairings between the folded slots
        }
    }
    for (std::size_t k = 0; k < cross.size(); ++k)
        if (!consumed[k]) throw Error("contract_network: unconsumed pairing after plan");

    DenseTensor result = *slot[static_cast<std::size_t>(first)];
    // restore original axis ids and order free axes canonically (sorted ids)
    for (auto& ax : result.axes) {
        std::size_t cut = ax.id.find('\x1f');
        ax.id = ax.id.substr(cut + 1);
    }
    std::vector<std::string> names;
    for (const auto& ax : result.axes) names.push_back(ax.id);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw Error("contract_network: duplicate free axis id in result");
    return result.permuted(names);
}

// Convenience: derive the node/edge structure from the pairings, plan, then
// contract.
inline DenseTensor contract_network(const std::vector<DenseTensor>& tensors,
                                    const std::vector<Pairing>& pairings) {
    std::vector<NodeStubs> nodes(tensors.size());
    std::map<std::string, std::size_t> edge_dims;
    for (std::size_t i = 0; i < tensors.size(); ++i)
        nodes[i].id = "t" + std::to_string(i);
    for (std::size_t k = 0; k < pairings.size(); ++k) {
        const auto& p = pairings[k];
        std::string e = "e" + std::to_string(k);
        nodes[static_cast<std::size_t>(p.first.tensor)].edges.push_back(e);
        nodes[static_cast<std::size_t>(p.second.tensor)].edges.push_back(e);
        const auto& t = tensors[static_cast<std::size_t>(p.first.tensor)];
        edge_dims[e] = t.axes[t.axis_index(p.first.axis)].dim;
    }
    return contract_network(tensors, pairings, plan_contraction_order(nodes, edge_dims));
}

} // namespace caten
