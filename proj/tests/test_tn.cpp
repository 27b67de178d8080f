// SPDX-License-Identifier: MIT
//
// Tensor-network state construction and contraction.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "caten/graphs.hpp"
#include "caten/linalg.hpp"
#include "caten/rng.hpp"
#include "caten/tn.hpp"

#include "helpers.hpp"

using namespace caten;

namespace {

// ---------------------------------------------------------------------------
// Reference oracles.  These re-derive every value from the graph with plain
// Eigen matrices and hand-rolled index arithmetic: no DenseTensor, no
// contraction planner, no shared code path with the implementation beyond the
// documented copy-naming convention.

// One Hilbert-space copy per edge attachment, in global order: vertices in
// vertex-list order, each vertex's incident edges in edge-list order (a
// self-loop attaching twice in a row).
struct RefCopy {
    std::size_t edge = 0;  // index into graph.edges()
    std::size_t dim = 0;
};

std::vector<RefCopy> ref_copies(const UndirectedMultigraph& g) {
    std::vector<RefCopy> copies;
    for (const std::string& v : g.vertices()) {
        for (std::size_t k = 0; k < g.edges().size(); ++k) {
            const UndirectedEdge& e = g.edges()[k];
            const std::size_t d = static_cast<std::size_t>(e.dim);
            if (e.u == v && e.v == v) {
                copies.push_back({k, d});
                copies.push_back({k, d});
            } else if (e.u == v || e.v == v) {
                copies.push_back({k, d});
            }
        }
    }
    return copies;
}

std::size_t ref_total_dim(const std::vector<RefCopy>& copies) {
    std::size_t n = 1;
    for (const RefCopy& c : copies) n *= c.dim;
    return n;
}

// values of every copy at a given linear index
std::vector<std::size_t> ref_digits(const std::vector<RefCopy>& copies,
                                    std::size_t linear) {
    std::vector<std::size_t> digits(copies.size());
    for (std::size_t i = copies.size(); i-- > 0;) {
        digits[i] = linear % copies[i].dim;
        linear /= copies[i].dim;
    }
    return digits;
}

Eigen::MatrixXcd ref_kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// product of the vertex matrices over the full copy space, vertices in
// vertex-list order (matching ref_copies)
Eigen::MatrixXcd ref_product(const UndirectedMultigraph& g,
                             const std::map<std::string, Eigen::MatrixXcd>& mats) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (const std::string& v : g.vertices()) out = ref_kron(out, mats.at(v));
    return out;
}

// unnormalized link vector: 1 wherever each edge's two copies agree
Eigen::VectorXcd ref_link(const UndirectedMultigraph& g) {
    const std::vector<RefCopy> copies = ref_copies(g);
    const std::size_t n = ref_total_dim(copies);
    Eigen::VectorXcd link = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<std::size_t> digits = ref_digits(copies, r);
        bool match = true;
        for (std::size_t e = 0; e < g.edges().size(); ++e) {
            std::vector<std::size_t> vals;
            for (std::size_t c = 0; c < copies.size(); ++c)
                if (copies[c].edge == e) vals.push_back(digits[c]);
            match = match && vals.size() == 2 && vals[0] == vals[1];
        }
        if (match) link(static_cast<Eigen::Index>(r)) = 1.0;
    }
    return link;
}

// <L| rho_P |L> evaluated densely over the full doubled space
double ref_contract(const UndirectedMultigraph& g,
                    const std::map<std::string, Eigen::MatrixXcd>& mats) {
    const Eigen::VectorXcd link = ref_link(g);
    const cplx v = (link.adjoint() * ref_product(g, mats) * link)(0, 0);
    REQUIRE(std::abs(v.imag()) <= 1e-9 * std::max(1.0, std::abs(v.real())));
    return v.real();
}

// Embed an operator q acting on one chosen copy per listed edge into the full
// copy space; spectator copies get a Kronecker delta.  q's factor order is
// region_edges; the chosen copy of an edge is its first attachment in global
// order when which==0 and the second when which==1 (for distinct endpoints
// the attachments are located at the endpoint vertices, so first==the copy at
// the earlier vertex in vertex-list order -- the tests below only use graphs
// whose vertex-list order is lexicographic, matching the library convention).
Eigen::MatrixXcd ref_embed(const UndirectedMultigraph& g,
                           const std::vector<std::string>& region_edges,
                           const std::map<std::string, int>& which,
                           const Eigen::MatrixXcd& q) {
    const std::vector<RefCopy> copies = ref_copies(g);
    const std::size_t n = ref_total_dim(copies);

    // for each region edge, pick the placed copy (index into `copies`)
    std::vector<std::size_t> placed;
    std::vector<std::size_t> region_dims;
    for (const std::string& eid : region_edges) {
        std::size_t e = 0;
        while (g.edges()[e].id != eid) ++e;
        std::vector<std::size_t> atts;
        for (std::size_t c = 0; c < copies.size(); ++c)
            if (copies[c].edge == e) atts.push_back(c);
        REQUIRE(atts.size() == 2);
        int w = 0;
        auto it = which.find(eid);
        if (it != which.end()) w = it->second;
        placed.push_back(atts[static_cast<std::size_t>(w)]);
        region_dims.push_back(static_cast<std::size_t>(g.edges()[e].dim));
    }

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<std::size_t> rd = ref_digits(copies, r);
        for (std::size_t c = 0; c < n; ++c) {
            const std::vector<std::size_t> cd = ref_digits(copies, c);
            bool spectators_equal = true;
            for (std::size_t k = 0; k < copies.size(); ++k) {
                if (std::find(placed.begin(), placed.end(), k) != placed.end()) continue;
                spectators_equal = spectators_equal && rd[k] == cd[k];
            }
            if (!spectators_equal) continue;
            std::size_t qr = 0, qc = 0;
            for (std::size_t k = 0; k < placed.size(); ++k) {
                qr = qr * region_dims[k] + rd[placed[k]];
                qc = qc * region_dims[k] + cd[placed[k]];
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                q(static_cast<Eigen::Index>(qr), static_cast<Eigen::Index>(qc));
        }
    }
    return out;
}

// <L| Q1 rho_P Q2 |L> evaluated densely
cplx ref_correlation(const UndirectedMultigraph& g,
                     const std::map<std::string, Eigen::MatrixXcd>& mats,
                     const std::vector<std::string>& q1_edges, const Eigen::MatrixXcd& q1,
                     const std::vector<std::string>& q2_edges, const Eigen::MatrixXcd& q2,
                     const std::map<std::string, int>& which) {
    const Eigen::VectorXcd link = ref_link(g);
    const Eigen::MatrixXcd m1 = ref_embed(g, q1_edges, which, q1);
    const Eigen::MatrixXcd m2 = ref_embed(g, q2_edges, which, q2);
    return (link.adjoint() * m1 * ref_product(g, mats) * m2 * link)(0, 0);
}

// For rank-1 networks built from coefficient tensors: the plain multilinear
// summation sum over edge indices of the product of coefficients, each
// vertex's coefficient vector stored row-major over its incident copies.
cplx ref_summation(const UndirectedMultigraph& g,
                   const std::map<std::string, std::vector<cplx>>& coeffs) {
    const std::size_t m = g.edges().size();
    std::vector<std::size_t> idx(m, 0);
    cplx total = 0.0;
    for (;;) {
        cplx term = 1.0;
        for (const std::string& v : g.vertices()) {
            std::size_t lin = 0;
            for (std::size_t e = 0; e < m; ++e) {
                const UndirectedEdge& ed = g.edges()[e];
                const std::size_t d = static_cast<std::size_t>(ed.dim);
                if (ed.u == v && ed.v == v) {
                    lin = (lin * d + idx[e]) * d + idx[e];
                } else if (ed.u == v || ed.v == v) {
                    lin = lin * d + idx[e];
                }
            }
            term *= coeffs.at(v)[lin];
        }
        total += term;
        std::size_t k = m;
        for (; k-- > 0;) {
            if (++idx[k] < static_cast<std::size_t>(g.edges()[k].dim)) break;
            idx[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Construction helpers (these do use the library API; the oracles above do
// not).

SquareOperator op_on(const UndirectedMultigraph& g, const std::string& v,
                     const Eigen::MatrixXcd& m) {
    return testutil::make_op(vertex_factor_layout(g, v), m);
}

TensorNetwork net(const UndirectedMultigraph& g,
                  const std::map<std::string, Eigen::MatrixXcd>& mats) {
    std::map<std::string, SquareOperator> ops;
    for (const auto& [v, m] : mats) ops.emplace(v, op_on(g, v, m));
    return make_tensor_network(g, ops);
}

std::map<std::string, Eigen::MatrixXcd> random_psd_mats(const UndirectedMultigraph& g,
                                                        Rng& rng) {
    std::map<std::string, Eigen::MatrixXcd> mats;
    for (const std::string& v : g.vertices()) {
        Eigen::Index d = 1;
        for (const Factor& f : vertex_factor_layout(g, v))
            d *= static_cast<Eigen::Index>(f.dim);
        mats[v] = rng.random_psd(d, d);
    }
    return mats;
}

// small graph shapes exercised by the randomized tests (vertex lists sorted
// so vertex-list order == lexicographic order, as ref_embed requires)
std::vector<UndirectedMultigraph> small_shapes() {
    std::vector<UndirectedMultigraph> shapes;
    shapes.push_back({{"a", "b"}, {{"x", "a", "b", 2}}});
    shapes.push_back({{"a", "b", "c"}, {{"x", "a", "b", 2}, {"y", "b", "c", 3}}});
    shapes.push_back({{"a", "b", "c"},
                      {{"x", "a", "b", 2}, {"y", "b", "c", 2}, {"z", "a", "c", 2}}});
    shapes.push_back({{"a", "b"}, {{"x", "a", "b", 2}, {"y", "a", "b", 3}}});
    shapes.push_back({{"a", "b"}, {{"l", "a", "a", 2}, {"x", "a", "b", 2}}});
    shapes.push_back({{"a", "b", "c", "d"},
                      {{"x", "a", "b", 2}, {"y", "a", "c", 2}, {"z", "a", "d", 2}}});
    return shapes;
}

}  // namespace

TEST_CASE("embed_tensor produces the rank-1 operator of the coefficients", "[tn]") {
    DenseTensor zero_ket = DenseTensor::zeros({{"x", 2}});
    zero_ket.data = {1.0, 0.0};
    SquareOperator p0 = embed_tensor(zero_ket);
    REQUIRE(p0.space == std::vector<Factor>{{"x", 2}});
    Eigen::MatrixXcd proj0(2, 2);
    proj0 << 1, 0, 0, 0;
    REQUIRE(testutil::max_abs_diff(p0.matrix, proj0) == 0.0);

    DenseTensor plus_ket = DenseTensor::zeros({{"x", 2}});
    const double s = 1.0 / std::sqrt(2.0);
    plus_ket.data = {s, s};
    Eigen::MatrixXcd proj_plus = Eigen::MatrixXcd::Constant(2, 2, 0.5);
    REQUIRE(testutil::max_abs_diff(embed_tensor(plus_ket).matrix, proj_plus) < 1e-15);

    // identity coefficient matrix -> (unnormalized) Bell projector.  Expected
    // matrix written out by hand from |psi> = |00> + |11>.
    DenseTensor id_coeffs = DenseTensor::zeros({{"x", 2}, {"y", 2}});
    id_coeffs.data = {1.0, 0.0, 0.0, 1.0};
    SquareOperator bell = embed_tensor(id_coeffs);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected(0, 0) = expected(0, 3) = expected(3, 0) = expected(3, 3) = 1.0;
    REQUIRE(bell.space == std::vector<Factor>{{"x", 2}, {"y", 2}});
    REQUIRE(testutil::max_abs_diff(bell.matrix, expected) == 0.0);
    REQUIRE(bell.trace() == cplx(2.0, 0.0));

    // trace of the embedding = sum of |T|^2
    Rng rng(71);
    DenseTensor t = DenseTensor::zeros({{"x", 2}, {"y", 3}});
    double norm2 = 0.0;
    for (auto& v : t.data) {
        v = rng.cgaussian();
        norm2 += std::norm(v);
    }
    REQUIRE(std::abs(embed_tensor(t).trace() - norm2) < 1e-12 * norm2);
}

TEST_CASE("link_state lays out one unnormalized pair per edge", "[tn]") {
    UndirectedMultigraph g({"a", "b"}, {{"x", "a", "b", 2}});
    TensorNetwork tn = net(g, {{"a", Eigen::MatrixXcd::Identity(2, 2)},
                               {"b", Eigen::MatrixXcd::Identity(2, 2)}});
    DenseTensor link = link_state(tn);
    REQUIRE(link.axes == std::vector<Axis>{{"x!a", 2}, {"x!b", 2}});
    REQUIRE(link.data == std::vector<cplx>{1.0, 0.0, 0.0, 1.0});

    // squared norm = product over edges of the edge dimension
    UndirectedMultigraph g2({"a", "b", "c"}, {{"x", "a", "b", 2}, {"y", "b", "c", 2}});
    TensorNetwork tn2 = net(g2, {{"a", Eigen::MatrixXcd::Identity(2, 2)},
                                 {"b", Eigen::MatrixXcd::Identity(4, 4)},
                                 {"c", Eigen::MatrixXcd::Identity(2, 2)}});
    double norm2 = 0.0;
    for (const cplx& v : link_state(tn2).data) norm2 += std::norm(v);
    REQUIRE(norm2 == 4.0);

    UndirectedMultigraph g3({"a", "b"}, {{"x", "a", "b", 3}});
    TensorNetwork tn3 = net(g3, {{"a", Eigen::MatrixXcd::Identity(3, 3)},
                                 {"b", Eigen::MatrixXcd::Identity(3, 3)}});
    norm2 = 0.0;
    for (const cplx& v : link_state(tn3).data) norm2 += std::norm(v);
    REQUIRE(norm2 == 3.0);

    // a self-loop pairs the vertex's two attachments
    UndirectedMultigraph g4({"a"}, {{"l", "a", "a", 2}});
    TensorNetwork tn4 = net(g4, {{"a", Eigen::MatrixXcd::Identity(4, 4)}});
    DenseTensor loop_link = link_state(tn4);
    REQUIRE(loop_link.axes == std::vector<Axis>{{"l!a", 2}, {"l!a!2", 2}});
    REQUIRE(loop_link.data == std::vector<cplx>{1.0, 0.0, 0.0, 1.0});

    // matches the reference construction on a multi-edge shape
    for (const UndirectedMultigraph& shape : small_shapes()) {
        Rng rng(5);
        TensorNetwork stn = net(shape, random_psd_mats(shape, rng));
        DenseTensor link_s = link_state(stn);
        // reorder the reference vector (global copy order) is unnecessary for
        // the norm comparison; compare entry counts and norms
        Eigen::VectorXcd ref = ref_link(shape);
        REQUIRE(link_s.size() == static_cast<std::size_t>(ref.size()));
        double a = 0.0;
        for (const cplx& v : link_s.data) a += std::norm(v);
        REQUIRE(std::abs(a - ref.squaredNorm()) < 1e-12 * std::max(1.0, a));
    }
}

TEST_CASE("vertex_factor_layout follows edge-list order with doubled loops", "[tn]") {
    UndirectedMultigraph g({"a", "b"},
                           {{"x", "b", "a", 2}, {"l", "a", "a", 3}, {"y", "a", "b", 4}});
    std::vector<Factor> la = vertex_factor_layout(g, "a");
    REQUIRE(la == std::vector<Factor>{{"x", 2}, {"l", 3}, {"l!2", 3}, {"y", 4}});
    std::vector<Factor> lb = vertex_factor_layout(g, "b");
    REQUIRE(lb == std::vector<Factor>{{"x", 2}, {"y", 4}});
    REQUIRE_THROWS_AS(vertex_factor_layout(g, "zz"), Error);
}

TEST_CASE("make_tensor_network validates shape and positivity", "[tn]") {
    UndirectedMultigraph g({"a", "b"}, {{"x", "a", "b", 2}});
    const Eigen::MatrixXcd id2 = Eigen::MatrixXcd::Identity(2, 2);

    // missing / unknown vertex
    REQUIRE_THROWS_AS(make_tensor_network(g, {{"a", op_on(g, "a", id2)}}), Error);
    REQUIRE_THROWS_AS(make_tensor_network(g, {{"a", op_on(g, "a", id2)},
                                              {"b", op_on(g, "b", id2)},
                                              {"zz", op_on(g, "b", id2)}}),
                      Error);

    // wrong factor ids / dims
    REQUIRE_THROWS_AS(make_tensor_network(g, {{"a", testutil::make_op({{"q", 2}}, id2)},
                                              {"b", op_on(g, "b", id2)}}),
                      Error);
    REQUIRE_THROWS_AS(
        make_tensor_network(g, {{"a", testutil::make_op({{"x", 3}},
                                                        Eigen::MatrixXcd::Identity(3, 3))},
                                {"b", op_on(g, "b", id2)}}),
        Error);

    // non-Hermitian and indefinite operators are rejected
    Eigen::MatrixXcd nh(2, 2);
    nh << 0, 1, 0, 0;
    REQUIRE_THROWS_AS(make_tensor_network(g, {{"a", op_on(g, "a", nh)},
                                              {"b", op_on(g, "b", id2)}}),
                      NotPSD);
    REQUIRE_THROWS_AS(make_tensor_network(g, {{"a", op_on(g, "a", -id2)},
                                              {"b", op_on(g, "b", id2)}}),
                      NotPSD);

    // factor order is canonicalized without changing the operator
    UndirectedMultigraph g2({"a", "b", "c"}, {{"x", "a", "b", 2}, {"y", "b", "c", 3}});
    Rng rng(9);
    Eigen::MatrixXcd pa = rng.random_psd(2, 2);
    Eigen::MatrixXcd pc = rng.random_psd(3, 3);
    Eigen::MatrixXcd pb = rng.random_psd(6, 6);
    // hand b's operator over with factors listed as (y, x): entry
    // ((j,i),(j',i')) of the swapped matrix is entry ((i,j),(i',j')) of the
    // canonical one
    Eigen::MatrixXcd pb_swapped(6, 6);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (int i2 = 0; i2 < 2; ++i2)
                for (int j2 = 0; j2 < 3; ++j2)
                    pb_swapped(j * 2 + i, j2 * 2 + i2) = pb(i * 3 + j, i2 * 3 + j2);
    std::map<std::string, SquareOperator> ops;
    ops.emplace("a", op_on(g2, "a", pa));
    ops.emplace("b", testutil::make_op({{"y", 3}, {"x", 2}}, pb_swapped));
    ops.emplace("c", op_on(g2, "c", pc));
    TensorNetwork tn = make_tensor_network(g2, ops);
    REQUIRE(tn.vertex_ops.at("b").space == vertex_factor_layout(g2, "b"));
    REQUIRE(testutil::max_abs_diff(tn.vertex_ops.at("b").matrix, pb) < 1e-14);
    const double direct = ref_contract(g2, {{"a", pa}, {"b", pb}, {"c", pc}});
    REQUIRE(std::abs(contract(tn) - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("total_state is the ordered product of vertex operators", "[tn]") {
    // one vertex, no edges: the scalar operator itself
    UndirectedMultigraph g0({"v"}, {});
    std::map<std::string, SquareOperator> ops0;
    ops0.emplace("v", testutil::make_op({}, Eigen::MatrixXcd::Constant(1, 1, 3.5)));
    TensorNetwork tn0 = make_tensor_network(g0, ops0);
    SquareOperator tot0 = total_state(tn0);
    REQUIRE(tot0.space.empty());
    REQUIRE(tot0.matrix(0, 0) == cplx(3.5, 0.0));
    REQUIRE(contract(tn0) == 3.5);

    // three-vertex chain: product in sorted vertex order with per-copy names
    UndirectedMultigraph g({"b", "c", "m"}, {{"x", "c", "m", 2}, {"y", "m", "b", 3}});
    Rng rng(13);
    Eigen::MatrixXcd pc = rng.random_psd(2, 2);
    Eigen::MatrixXcd pm = rng.random_psd(6, 6);
    Eigen::MatrixXcd pb = rng.random_psd(3, 3);
    TensorNetwork tn = net(g, {{"b", pb}, {"c", pc}, {"m", pm}});
    SquareOperator tot = total_state(tn);
    std::vector<Factor> want = {{"y!b", 3}, {"x!c", 2}, {"x!m", 2}, {"y!m", 3}};
    REQUIRE(tot.space == want);
    REQUIRE(testutil::max_abs_diff(tot.matrix, ref_kron(ref_kron(pb, pc), pm)) < 1e-12);

    // trace multiplies over vertices
    const cplx tr = tot.trace();
    const cplx want_tr = pb.trace() * pc.trace() * pm.trace();
    REQUIRE(std::abs(tr - want_tr) < 1e-10 * std::abs(want_tr));
}

TEST_CASE("contract matches the three-tensor worked example", "[tn]") {
    // |<psi_c| M |psi_b>|^2 for a chain c -- m -- b carrying rank-1 operators
    for (auto [d1, d2] : {std::pair<int, int>{2, 3}, {3, 2}, {2, 2}}) {
        Rng rng(mix_seed(23, static_cast<std::uint64_t>(d1 * 8 + d2)));
        UndirectedMultigraph g({"b", "c", "m"}, {{"x", "c", "m", d1}, {"y", "m", "b", d2}});
        std::vector<cplx> c(static_cast<std::size_t>(d1)), b(static_cast<std::size_t>(d2)),
            mcoef(static_cast<std::size_t>(d1 * d2));
        for (auto& v : c) v = rng.cgaussian();
        for (auto& v : b) v = rng.cgaussian();
        for (auto& v : mcoef) v = rng.cgaussian();

        DenseTensor tc = DenseTensor::zeros({{"x", static_cast<std::size_t>(d1)}});
        tc.data = c;
        DenseTensor tb = DenseTensor::zeros({{"y", static_cast<std::size_t>(d2)}});
        tb.data = b;
        DenseTensor tm = DenseTensor::zeros(
            {{"x", static_cast<std::size_t>(d1)}, {"y", static_cast<std::size_t>(d2)}});
        tm.data = mcoef;

        std::map<std::string, SquareOperator> ops;
        ops.emplace("c", embed_tensor(tc));
        ops.emplace("b", embed_tensor(tb));
        ops.emplace("m", embed_tensor(tm));
        TensorNetwork tn = make_tensor_network(g, ops);

        cplx amp = 0.0;
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d2; ++j)
                amp += c[static_cast<std::size_t>(i)] *
                       mcoef[static_cast<std::size_t>(i * d2 + j)] *
                       b[static_cast<std::size_t>(j)];
        const double want = std::norm(amp);
        REQUIRE(std::abs(contract(tn) - want) < 1e-10 * std::max(1.0, want));
    }
}

TEST_CASE("contract of maximally mixed operators on a single edge", "[tn]") {
    for (int d : {2, 3, 5}) {
        UndirectedMultigraph g({"a", "b"}, {{"x", "a", "b", d}});
        Eigen::MatrixXcd mixed =
            Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d);
        TensorNetwork tn = net(g, {{"a", mixed}, {"b", mixed}});
        const double got = contract(tn);
        REQUIRE(std::abs(got - 1.0 / d) < 1e-12);
        REQUIRE(std::abs(got - ref_contract(g, {{"a", mixed}, {"b", mixed}})) < 1e-12);
    }
}

TEST_CASE("contract agrees with the dense oracle on random PSD networks", "[tn]") {
    std::uint64_t trial = 0;
    for (const UndirectedMultigraph& shape : small_shapes()) {
        for (int rep = 0; rep < 4; ++rep) {
            Rng rng(mix_seed(31, trial++));
            std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(shape, rng);
            TensorNetwork tn = net(shape, mats);
            const double want = ref_contract(shape, mats);
            const double got = contract(tn);
            REQUIRE(std::abs(got - want) < 1e-9 * std::max(1.0, std::abs(want)));
            REQUIRE(got >= -1e-10);
        }
    }
}

TEST_CASE("contract scales linearly in each vertex operator", "[tn]") {
    UndirectedMultigraph g({"a", "b", "c"},
                           {{"x", "a", "b", 2}, {"y", "b", "c", 2}, {"z", "a", "c", 2}});
    Rng rng(37);
    std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(g, rng);
    const double base = contract(net(g, mats));
    for (double scale : {2.5, 0.3}) {
        std::map<std::string, Eigen::MatrixXcd> scaled = mats;
        scaled["b"] *= scale;
        const double got = contract(net(g, scaled));
        REQUIRE(std::abs(got - scale * base) < 1e-10 * std::max(1.0, scale * base));
    }
    std::map<std::string, Eigen::MatrixXcd> zeroed = mats;
    zeroed["b"].setZero();
    REQUIRE(contract(net(g, zeroed)) == 0.0);
}

TEST_CASE("contract equals the squared summation on rank-1 networks", "[tn]") {
    std::uint64_t trial = 0;
    for (const UndirectedMultigraph& shape : small_shapes()) {
        Rng rng(mix_seed(41, trial++));
        std::map<std::string, std::vector<cplx>> coeffs;
        std::map<std::string, SquareOperator> ops;
        for (const std::string& v : shape.vertices()) {
            const std::vector<Factor> layout = vertex_factor_layout(shape, v);
            std::vector<Axis> axes;
            for (const Factor& f : layout) axes.push_back({f.id, f.dim});
            DenseTensor t = DenseTensor::zeros(axes);
            for (auto& x : t.data) x = rng.cgaussian();
            coeffs[v] = t.data;
            ops.emplace(v, embed_tensor(t));
        }
        TensorNetwork tn = make_tensor_network(shape, ops);
        const double want = std::norm(ref_summation(shape, coeffs));
        REQUIRE(std::abs(contract(tn) - want) < 1e-9 * std::max(1.0, want));
    }
}

TEST_CASE("contract handles networks whose doubled space is huge", "[tn]") {
    // a 14-vertex chain of qubit edges: the joint doubled space has 2^26
    // amplitudes, far beyond anything the contraction may materialize, while
    // the direct summation oracle only visits 2^13 index assignments
    const int n = 14;
    std::vector<std::string> vs;
    std::vector<UndirectedEdge> es;
    for (int i = 0; i < n; ++i) vs.push_back("v" + std::to_string(i));
    for (int i = 0; i + 1 < n; ++i)
        es.push_back({"e" + std::to_string(i), vs[static_cast<std::size_t>(i)],
                      vs[static_cast<std::size_t>(i + 1)], 2});
    UndirectedMultigraph g(vs, es);

    Rng rng(43);
    std::map<std::string, std::vector<cplx>> coeffs;
    std::map<std::string, SquareOperator> ops;
    for (const std::string& v : g.vertices()) {
        std::vector<Axis> axes;
        for (const Factor& f : vertex_factor_layout(g, v)) axes.push_back({f.id, f.dim});
        DenseTensor t = DenseTensor::zeros(axes);
        for (auto& x : t.data) x = rng.cgaussian();
        coeffs[v] = t.data;
        ops.emplace(v, embed_tensor(t));
    }
    TensorNetwork tn = make_tensor_network(g, ops);
    const double want = std::norm(ref_summation(g, coeffs));
    REQUIRE(std::abs(contract(tn) - want) < 1e-9 * std::max(1.0, want));
}

TEST_CASE("correlation with identity insertions reduces to contract", "[tn]") {
    std::uint64_t trial = 0;
    for (const UndirectedMultigraph& shape : small_shapes()) {
        Rng rng(mix_seed(47, trial++));
        std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(shape, rng);
        TensorNetwork tn = net(shape, mats);
        std::vector<Factor> region;
        for (const UndirectedEdge& e : shape.edges())
            region.push_back({e.id, static_cast<std::size_t>(e.dim)});
        const SquareOperator id = SquareOperator::identity(region);
        const cplx got = correlation(tn, id, id);
        const double want = contract(tn);
        REQUIRE(std::abs(got.real() - want) < 1e-10 * std::max(1.0, std::abs(want)));
        REQUIRE(std::abs(got.imag()) < 1e-10 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("correlation matches the dense oracle", "[tn]") {
    // chain with two region edges; general (non-Hermitian) insertions on all
    // four placement combinations
    UndirectedMultigraph g({"a", "b", "c", "d"},
                           {{"x", "a", "b", 2}, {"y", "b", "c", 2}, {"z", "c", "d", 3}});
    std::uint64_t trial = 0;
    for (int wx : {0, 1}) {
        for (int wz : {0, 1}) {
            Rng rng(mix_seed(53, trial++));
            std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(g, rng);
            TensorNetwork tn = net(g, mats);
            Eigen::MatrixXcd q1m = rng.gaussian_matrix(6, 6);
            Eigen::MatrixXcd q2m = rng.gaussian_matrix(6, 6);
            SquareOperator q1 = testutil::make_op({{"x", 2}, {"z", 3}}, q1m);
            SquareOperator q2 = testutil::make_op({{"x", 2}, {"z", 3}}, q2m);
            CopySelector sel;
            sel.copy["x"] = wx;
            sel.copy["z"] = wz;
            const cplx got = correlation(tn, q1, q2, sel);
            const cplx want = ref_correlation(g, mats, {"x", "z"}, q1m, {"x", "z"}, q2m,
                                              {{"x", wx}, {"z", wz}});
            REQUIRE(std::abs(got - want) < 1e-9 * std::max(1.0, std::abs(want)));
        }
    }

    // operators on different regions are extended by identity to the union,
    // and a factor order differing from edge-list order is accepted
    Rng rng(59);
    std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(g, rng);
    TensorNetwork tn = net(g, mats);
    Eigen::MatrixXcd q1m = rng.gaussian_matrix(2, 2);
    Eigen::MatrixXcd q2m = rng.gaussian_matrix(6, 6);
    SquareOperator q1 = testutil::make_op({{"y", 2}}, q1m);
    SquareOperator q2 = testutil::make_op({{"z", 3}, {"y", 2}}, q2m);
    const cplx got = correlation(tn, q1, q2);
    const cplx want =
        ref_correlation(g, mats, {"y"}, q1m, {"z", "y"}, q2m, {});
    REQUIRE(std::abs(got - want) < 1e-9 * std::max(1.0, std::abs(want)));

    // default placement is the explicit all-zeros selector
    CopySelector zeros;
    zeros.copy["y"] = 0;
    zeros.copy["z"] = 0;
    REQUIRE(correlation(tn, q1, q2) == correlation(tn, q1, q2, zeros));
}

TEST_CASE("correlation is invariant under placement swap with transposes", "[tn]") {
    // moving an insertion across an edge's entangled pair transposes it, so
    // flipping every placement and transposing both operators preserves the
    // value
    UndirectedMultigraph g({"a", "b", "c"}, {{"x", "a", "b", 2}, {"y", "b", "c", 3}});
    for (std::uint64_t trial = 0; trial < 6; ++trial) {
        Rng rng(mix_seed(61, trial));
        std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(g, rng);
        TensorNetwork tn = net(g, mats);
        Eigen::MatrixXcd q1m = rng.gaussian_matrix(6, 6);
        Eigen::MatrixXcd q2m = rng.gaussian_matrix(6, 6);
        SquareOperator q1 = testutil::make_op({{"x", 2}, {"y", 3}}, q1m);
        SquareOperator q2 = testutil::make_op({{"x", 2}, {"y", 3}}, q2m);
        SquareOperator q1t = testutil::make_op({{"x", 2}, {"y", 3}}, q1m.transpose());
        SquareOperator q2t = testutil::make_op({{"x", 2}, {"y", 3}}, q2m.transpose());
        CopySelector here, there;
        here.copy["x"] = 0;
        here.copy["y"] = 0;
        there.copy["x"] = 1;
        there.copy["y"] = 1;
        const cplx lhs = correlation(tn, q1, q2, here);
        const cplx rhs = correlation(tn, q1t, q2t, there);
        REQUIRE(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("correlation rejects malformed regions and selectors", "[tn]") {
    UndirectedMultigraph g({"a", "b"}, {{"x", "a", "b", 2}});
    Rng rng(67);
    std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(g, rng);
    TensorNetwork tn = net(g, mats);
    const SquareOperator on_x = SquareOperator::identity({{"x", 2}});

    // unknown edge in a region
    REQUIRE_THROWS_AS(correlation(tn, SquareOperator::identity({{"nope", 2}}), on_x),
                      Error);
    // dimension mismatch against the edge
    REQUIRE_THROWS_AS(correlation(tn, SquareOperator::identity({{"x", 3}}), on_x),
                      Error);
    // selector value out of range, selector outside the region
    CopySelector bad;
    bad.copy["x"] = 2;
    REQUIRE_THROWS_AS(correlation(tn, on_x, on_x, bad), Error);
    CopySelector outside;
    outside.copy["q"] = 0;
    REQUIRE_THROWS_AS(correlation(tn, on_x, on_x, outside), Error);
}

TEST_CASE("contract of a self-loop traces the loop pair", "[tn]") {
    // embed a coefficient matrix T on the loop's two copies: the link state
    // identifies them, so the amplitude is the plain matrix trace of T
    UndirectedMultigraph g({"a"}, {{"l", "a", "a", 3}});
    Rng rng(73);
    std::vector<cplx> tdata(9);
    for (auto& v : tdata) v = rng.cgaussian();
    DenseTensor t = DenseTensor::zeros({{"l", 3}, {"l!2", 3}});
    t.data = tdata;
    std::map<std::string, SquareOperator> ops;
    ops.emplace("a", embed_tensor(t));
    TensorNetwork tn = make_tensor_network(g, ops);
    cplx tr = tdata[0] + tdata[4] + tdata[8];
    const double want = std::norm(tr);
    REQUIRE(std::abs(contract(tn) - want) < 1e-10 * std::max(1.0, want));

    // and the dense oracle agrees on a loop-plus-edge network
    UndirectedMultigraph g2({"a", "b"}, {{"l", "a", "a", 2}, {"x", "a", "b", 2}});
    std::map<std::string, Eigen::MatrixXcd> mats = random_psd_mats(g2, rng);
    const double want2 = ref_contract(g2, mats);
    REQUIRE(std::abs(contract(net(g2, mats)) - want2) <
            1e-9 * std::max(1.0, std::abs(want2)));
}
