#include "svem/element.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <string>

#include "svem/errors.hpp"

namespace svem {

LocalDofLayout make_dof_layout(int k, int n_edges, int eta) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    LocalDofLayout layout;
    layout.k = k;
    layout.n_edges = n_edges;
    layout.eta = eta;
    layout.deficient = k >= eta;
    layout.n_boundary = k * n_edges;
    layout.n_moments =
        layout.deficient ? ScaledMonomialBasis::dimension(k - eta) : 0;
    layout.total = layout.n_boundary + layout.n_moments;
    return layout;
}

int edge_node_dof(const LocalDofLayout& layout, int edge, int node) {
    if (node == 0) return edge;
    if (node == layout.k) return (edge + 1) % layout.n_edges;
    return layout.n_edges + edge * (layout.k - 1) + (node - 1);
}

std::vector<Point> boundary_node_coords(std::span<const Point> points, int k) {
    const int n = static_cast<int>(points.size());
    std::vector<Point> nodes(points.begin(), points.end());
    if (k == 1) return nodes;
    const Rule1d gl = gauss_lobatto(k + 1);
    nodes.resize(k * n);
    for (int e = 0; e < n; ++e) {
        const Point a = points[e];
        const Point b = points[(e + 1) % n];
        const Point mid = 0.5 * (a + b);
        const Point half = 0.5 * (b - a);
        for (int j = 1; j < k; ++j)
            nodes[n + e * (k - 1) + (j - 1)] = mid + gl.nodes[j] * half;
    }
    return nodes;
}

namespace {

using float128 = boost::multiprecision::float128;

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Pt {
    S x, y;
};

Eigen::MatrixXd to_double(const Eigen::MatrixXd& m) { return m; }
Eigen::MatrixXd to_double(const MatX<float128>& m) {
    return m.unaryExpr([](const float128& v) { return static_cast<double>(v); });
}

// ---------------------------------------------------------------------------
// 1D rules in working precision: take the double nodes as seeds and polish
// with Newton in S, then recompute the weights in S.

template <typename S>
void legendre_pair(int n, const S& x, S& p, S& dp) {
    S p0 = 1, p1 = x;
    if (n == 0) {
        p = p0;
        dp = 0;
        return;
    }
    for (int m = 2; m <= n; ++m) {
        const S p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (p0 - x * p1) / (1 - x * x);  // valid for |x| < 1
}

template <typename S>
struct R1 {
    VecX<S> nodes, weights;
};

template <typename S>
R1<S> legendre_rule_t(int p) {
    const Rule1d seed = gauss_legendre(p);
    R1<S> rule;
    rule.nodes.resize(p);
    rule.weights.resize(p);
    for (int i = 0; i < p; ++i) {
        S x = S(seed.nodes[i]);
        if (std::abs(seed.nodes[i]) > 1e-14) {
            for (int it = 0; it < 4; ++it) {
                S f, df;
                legendre_pair(p, x, f, df);
                x -= f / df;
            }
        } else {
            x = 0;
        }
        S f, df;
        legendre_pair(p, x, f, df);
        rule.nodes[i] = x;
        rule.weights[i] = 2 / ((1 - x * x) * df * df);
    }
    return rule;
}

template <typename S>
R1<S> lobatto_rule_t(int p) {
    const Rule1d seed = gauss_lobatto(p);
    const int n = p - 1;
    R1<S> rule;
    rule.nodes.resize(p);
    rule.weights.resize(p);
    for (int i = 0; i < p; ++i) {
        S x = S(seed.nodes[i]);
        if (i > 0 && i < p - 1 && std::abs(seed.nodes[i]) > 1e-14) {
            for (int it = 0; it < 4; ++it) {
                S f, df, pn;
                legendre_pair(n, x, pn, f);  // f = P_n'
                df = (2 * x * f - S(n) * S(n + 1) * pn) / (1 - x * x);
                x -= f / df;
            }
        } else if (i > 0 && i < p - 1) {
            x = 0;
        }
        S pn, dpn;
        legendre_pair(n, x, pn, dpn);
        rule.nodes[i] = x;
        rule.weights[i] = 2 / (S(p) * S(n) * pn * pn);
    }
    return rule;
}

// ---------------------------------------------------------------------------
// polygon rule in working precision (same fan / ear-clip split as the public
// polygon_quadrature)

template <typename S>
struct PR {
    std::vector<Pt<S>> pts;
    VecX<S> w;
};

template <typename S>
PR<S> polygon_rule_t(std::span<const Point> poly, int degree) {
    const std::size_t n = poly.size();
    std::vector<std::array<Pt<S>, 3>> tris;
    {
        // centroid in S
        S a2 = 0, cx = 0, cy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Pt<S> p{S(poly[i].x), S(poly[i].y)};
            const Pt<S> q{S(poly[(i + 1) % n].x), S(poly[(i + 1) % n].y)};
            const S cw = p.x * q.y - p.y * q.x;
            a2 += cw;
            cx += (p.x + q.x) * cw;
            cy += (p.y + q.y) * cw;
        }
        const Pt<S> centroid{cx / (3 * a2), cy / (3 * a2)};
        bool fan_ok = true;
        for (std::size_t i = 0; i < n && fan_ok; ++i) {
            const Pt<S> b{S(poly[i].x) - centroid.x, S(poly[i].y) - centroid.y};
            const Pt<S> c{S(poly[(i + 1) % n].x) - centroid.x,
                          S(poly[(i + 1) % n].y) - centroid.y};
            if (b.x * c.y - b.y * c.x <= 0) fan_ok = false;
        }
        if (fan_ok) {
            for (std::size_t i = 0; i < n; ++i)
                tris.push_back({centroid,
                                Pt<S>{S(poly[i].x), S(poly[i].y)},
                                Pt<S>{S(poly[(i + 1) % n].x),
                                      S(poly[(i + 1) % n].y)}});
        } else {
            for (const auto& t : triangulate_polygon(poly))
                tris.push_back({Pt<S>{S(poly[t[0]].x), S(poly[t[0]].y)},
                                Pt<S>{S(poly[t[1]].x), S(poly[t[1]].y)},
                                Pt<S>{S(poly[t[2]].x), S(poly[t[2]].y)}});
        }
    }

    const int p = std::max(1, (degree + 3) / 2);
    const R1<S> g = legendre_rule_t<S>(p);
    PR<S> rule;
    rule.pts.reserve(tris.size() * p * p);
    std::vector<S> w;
    w.reserve(tris.size() * p * p);
    for (const auto& t : tris) {
        const S jac = (t[1].x - t[0].x) * (t[2].y - t[0].y) -
                      (t[1].y - t[0].y) * (t[2].x - t[0].x);
        for (int i = 0; i < p; ++i) {
            const S u = (g.nodes[i] + 1) / 2;
            for (int j = 0; j < p; ++j) {
                const S v = (g.nodes[j] + 1) / 2 * (1 - u);
                rule.pts.push_back(
                    Pt<S>{t[0].x + u * (t[1].x - t[0].x) + v * (t[2].x - t[0].x),
                          t[0].y + u * (t[1].y - t[0].y) + v * (t[2].y - t[0].y)});
                w.push_back(g.weights[i] * g.weights[j] * (1 - u) * jac / 4);
            }
        }
    }
    rule.w.resize(static_cast<long>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) rule.w[static_cast<long>(i)] = w[i];
    return rule;
}

// ---------------------------------------------------------------------------
// solves

double qr_condition_estimate_diag(const Eigen::VectorXd& rdiag) {
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (long i = 0; i < rdiag.size(); ++i) {
        dmax = std::max(dmax, rdiag[i]);
        dmin = std::min(dmin, rdiag[i]);
    }
    return dmin == 0.0 ? std::numeric_limits<double>::infinity() : dmax / dmin;
}

// threshold 1e12 on the Gram condition = 1e6 on its square-root factor
constexpr double kFactorConditionThreshold = 1e6;
constexpr double kConditionThreshold = 1e12;

// Column-equilibrated least-squares solve of A x = B; the normal equations
// are the Gram system the spec names, with half its condition number.
template <typename S>
MatX<S> solve_equilibrated_ls(const MatX<S>& A, const MatX<S>& B,
                              const char* what) {
    VecX<S> scale(A.cols());
    for (long j = 0; j < A.cols(); ++j) {
        const S n = A.col(j).norm();
        scale[j] = n > 0 ? 1 / n : S(1);
    }
    const MatX<S> As = A * scale.asDiagonal();
    Eigen::ColPivHouseholderQR<MatX<S>> qr(As);
    Eigen::VectorXd rdiag(A.cols());
    for (long i = 0; i < A.cols(); ++i)
        rdiag[i] = std::abs(static_cast<double>(qr.matrixR()(i, i)));
    if (qr_condition_estimate_diag(rdiag) > kFactorConditionThreshold)
        throw Error(ErrorCode::Conditioning,
                    std::string(what) + " condition past 1e12");
    MatX<S> X = qr.solve(B);
    X += qr.solve(B - As * X);
    return scale.asDiagonal() * X;
}

// Jacobi-scaled SPD solve with one refinement sweep.
template <typename S>
MatX<S> solve_spd_refined(const MatX<S>& A, const MatX<S>& B, const char* what) {
    const long n = A.rows();
    VecX<S> scale(n);
    for (long i = 0; i < n; ++i) {
        if (!(A(i, i) > 0))
            throw Error(ErrorCode::Conditioning,
                        std::string(what) + " has a non-positive diagonal");
        scale[i] = 1 / sqrt(A(i, i));
    }
    const MatX<S> As = scale.asDiagonal() * A * scale.asDiagonal();
    Eigen::LLT<MatX<S>> llt(As);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::Conditioning,
                    std::string(what) + " is not numerically SPD");
    const MatX<S> Bs = scale.asDiagonal() * B;
    MatX<S> X = llt.solve(Bs);
    X += llt.solve(Bs - As * X);
    return scale.asDiagonal() * X;
}

// Jacobi-scaled QR solve with condition check and refinement (Ritz system).
template <typename S>
MatX<S> solve_scaled_qr(const MatX<S>& G, const MatX<S>& B, const char* what) {
    const long n = G.rows();
    VecX<S> scale(n);
    for (long i = 0; i < n; ++i) {
        const S d = abs(G(i, i));
        scale[i] = d > 0 ? 1 / sqrt(d) : S(1);
    }
    const MatX<S> Gs = scale.asDiagonal() * G * scale.asDiagonal();
    Eigen::ColPivHouseholderQR<MatX<S>> qr(Gs);
    Eigen::VectorXd rdiag(n);
    for (long i = 0; i < n; ++i)
        rdiag[i] = std::abs(static_cast<double>(qr.matrixR()(i, i)));
    if (qr_condition_estimate_diag(rdiag) > kConditionThreshold)
        throw Error(ErrorCode::Conditioning,
                    std::string(what) + " condition past 1e12");
    const MatX<S> Bs = scale.asDiagonal() * B;
    MatX<S> X = qr.solve(Bs);
    X += qr.solve(Bs - Gs * X);
    return scale.asDiagonal() * X;
}

double dabs(double v) { return std::abs(v); }
double dabs(const float128& v) { return std::abs(static_cast<double>(v)); }

// ---------------------------------------------------------------------------
// the templated per-cell pipeline

template <typename S>
struct CellCtx {
    std::span<const Point> poly;
    const CellGeometry& geo;
    int k, n, r;
    LocalDofLayout layout;
    std::vector<Pt<S>> pts;
    Pt<S> centroid;
    S h, area;
    std::vector<std::pair<int, int>> exps;  // graded-lex exponents
    R1<S> gl, gleg;
    MatX<S> lagrange;  // (k+1) x (k+1): Lagrange at Lobatto nodes -> Legendre pts

    CellCtx(std::span<const Point> poly_, const CellGeometry& geo_, int k_,
            int eta)
        : poly(poly_),
          geo(geo_),
          k(k_),
          n(static_cast<int>(poly_.size())),
          r(ScaledMonomialBasis::dimension(k_)),
          layout(make_dof_layout(k_, static_cast<int>(poly_.size()), eta)) {
        for (const Point& p : poly_) pts.push_back({S(p.x), S(p.y)});
        centroid = {S(geo_.centroid.x), S(geo_.centroid.y)};
        h = S(geo_.diameter);
        area = S(geo_.area);
        for (int d = 0; d <= k; ++d)
            for (int ay = 0; ay <= d; ++ay) exps.emplace_back(d - ay, ay);
        gl = lobatto_rule_t<S>(k + 1);
        gleg = legendre_rule_t<S>(k + 1);
        lagrange.resize(k + 1, k + 1);
        for (int q = 0; q <= k; ++q)
            for (int j = 0; j <= k; ++j) {
                S v = 1;
                for (int m = 0; m <= k; ++m) {
                    if (m == j) continue;
                    v *= (gleg.nodes[q] - gl.nodes[m]) /
                         (gl.nodes[j] - gl.nodes[m]);
                }
                lagrange(q, j) = v;
            }
    }

    S mono(int alpha, const Pt<S>& p) const {
        const auto [ax, ay] = exps[alpha];
        S v = 1;
        const S sx = (p.x - centroid.x) / h;
        const S sy = (p.y - centroid.y) / h;
        for (int i = 0; i < ax; ++i) v *= sx;
        for (int i = 0; i < ay; ++i) v *= sy;
        return v;
    }

    Pt<S> mono_grad(int alpha, const Pt<S>& p) const {
        const auto [ax, ay] = exps[alpha];
        const S sx = (p.x - centroid.x) / h;
        const S sy = (p.y - centroid.y) / h;
        auto ipow = [](S base, int e) {
            S v = 1;
            for (int i = 0; i < e; ++i) v *= base;
            return v;
        };
        Pt<S> g{S(0), S(0)};
        if (ax > 0) g.x = S(ax) / h * ipow(sx, ax - 1) * ipow(sy, ay);
        if (ay > 0) g.y = S(ay) / h * ipow(sx, ax) * ipow(sy, ay - 1);
        return g;
    }

    template <typename F>
    void for_edge_quadrature(F&& fn) const {
        for (int e = 0; e < n; ++e) {
            const Pt<S>& a = pts[e];
            const Pt<S>& b = pts[(e + 1) % n];
            const Pt<S> mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
            const Pt<S> half{(b.x - a.x) / 2, (b.y - a.y) / 2};
            const S len = sqrt((b.x - a.x) * (b.x - a.x) +
                               (b.y - a.y) * (b.y - a.y));
            for (int q = 0; q <= k; ++q) {
                const Pt<S> x{mid.x + gleg.nodes[q] * half.x,
                              mid.y + gleg.nodes[q] * half.y};
                fn(e, q, x, len / 2 * gleg.weights[q]);
            }
        }
    }

    Pt<S> outward_normal(int e) const {
        const Pt<S>& a = pts[e];
        const Pt<S>& b = pts[(e + 1) % n];
        const S len =
            sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y));
        return {(b.y - a.y) / len, -(b.x - a.x) / len};
    }
};

// power-moment table T(p,q) = int ((x-c)/h)^p ((y-c)/h)^q up to max_degree
template <typename S>
MatX<S> power_table(const CellCtx<S>& ctx, const PR<S>& rule, int max_degree) {
    const long np = static_cast<long>(rule.pts.size());
    MatX<S> px(np, max_degree + 1), py(np, max_degree + 1);
    for (long i = 0; i < np; ++i) {
        const S sx = (rule.pts[static_cast<std::size_t>(i)].x - ctx.centroid.x) / ctx.h;
        const S sy = (rule.pts[static_cast<std::size_t>(i)].y - ctx.centroid.y) / ctx.h;
        px(i, 0) = py(i, 0) = 1;
        for (int d = 1; d <= max_degree; ++d) {
            px(i, d) = px(i, d - 1) * sx;
            py(i, d) = py(i, d - 1) * sy;
        }
    }
    MatX<S> table = MatX<S>::Zero(max_degree + 1, max_degree + 1);
    for (int p = 0; p <= max_degree; ++p)
        for (int q = 0; p + q <= max_degree; ++q)
            table(p, q) =
                (px.col(p).cwiseProduct(py.col(q)).cwiseProduct(rule.w)).sum();
    return table;
}

// Ritz-Galerkin system over the enlarged DoF vector (Green's formula plus
// the k-dependent closure row), solved against the gradient Gram.
template <typename S>
MatX<S> ritz_system_enlarged(const CellCtx<S>& ctx, const MatX<S>& grad_gram,
                             const MatX<S>& H) {
    const int r = ctx.r;
    const int kN = ctx.layout.n_boundary;
    MatX<S> B = MatX<S>::Zero(r, kN + r);
    ctx.for_edge_quadrature([&](int e, int q, const Pt<S>& x, const S& w) {
        const Pt<S> nrm = ctx.outward_normal(e);
        VecX<S> dn(r);
        for (int a = 0; a < r; ++a) {
            const Pt<S> g = ctx.mono_grad(a, x);
            dn[a] = g.x * nrm.x + g.y * nrm.y;
        }
        for (int j = 0; j <= ctx.k; ++j) {
            const int dof = edge_node_dof(ctx.layout, e, j);
            B.col(dof).noalias() += w * ctx.lagrange(q, j) * dn;
        }
    });
    const S invh2 = 1 / (ctx.h * ctx.h);
    for (int a = 0; a < r; ++a) {
        const auto [ax, ay] = ctx.exps[a];
        auto idx = [](int px, int py) {
            const int d = px + py;
            return d * (d + 1) / 2 + py;
        };
        if (ax >= 2)
            B(a, kN + idx(ax - 2, ay)) -= S(ax) * S(ax - 1) * invh2 * ctx.area;
        if (ay >= 2)
            B(a, kN + idx(ax, ay - 2)) -= S(ay) * S(ay - 1) * invh2 * ctx.area;
    }

    MatX<S> G = grad_gram;
    if (ctx.k == 1) {
        G.row(0).setZero();
        B.row(0).setZero();
        ctx.for_edge_quadrature([&](int e, int q, const Pt<S>& x, const S& w) {
            for (int a = 0; a < r; ++a) G(0, a) += w * ctx.mono(a, x);
            for (int j = 0; j <= ctx.k; ++j)
                B(0, edge_node_dof(ctx.layout, e, j)) += w * ctx.lagrange(q, j);
        });
    } else {
        G.row(0) = H.row(0);
        B.row(0).setZero();
        B(0, kN) = ctx.area;
    }
    return solve_scaled_qr<S>(G, B, "Ritz Gram with closure");
}

template <typename S>
void boundary_sample_system(const CellCtx<S>& ctx, MatX<S>& Smat, MatX<S>& W) {
    const int n_samples = ctx.n * (ctx.k + 1);
    Smat.setZero(n_samples, ctx.r);
    W.setZero(n_samples, ctx.layout.total);
    int row = 0;
    ctx.for_edge_quadrature([&](int e, int q, const Pt<S>& x, const S& w) {
        const S sw = sqrt(w);
        for (int a = 0; a < ctx.r; ++a) Smat(row, a) = sw * ctx.mono(a, x);
        for (int j = 0; j <= ctx.k; ++j)
            W(row, edge_node_dof(ctx.layout, e, j)) = sw * ctx.lagrange(q, j);
        ++row;
    });
}

// full pipeline; `enhanced` switches to the enhanced-VEM moment layout where
// the missing moments are slaved to Pi_nabla instead of Pi_d / Pi_S
template <typename S>
ElementOperators build_impl(std::span<const Point> points,
                            const CellGeometry& geo, int k, double eps,
                            bool enhanced) {
    CellCtx<S> ctx(points, geo, k, geo.eta);
    if (enhanced) {
        ctx.layout.n_moments = ScaledMonomialBasis::dimension(k - 2);
        ctx.layout.total = ctx.layout.n_boundary + ctx.layout.n_moments;
        ctx.layout.deficient = ctx.layout.n_moments > 0;
    } else if (ctx.layout.deficient && !geo.convex) {
        throw Error(ErrorCode::UnsupportedConfiguration,
                    "serendipity moments on a non-convex cell with k >= eta_E");
    }
    const int r = ctx.r;
    const int total = ctx.layout.total;
    const int kN = ctx.layout.n_boundary;
    const int nm = ctx.layout.n_moments;

    const PR<S> rule = polygon_rule_t<S>(points, 2 * k + 2);
    const MatX<S> table = power_table(ctx, rule, 2 * k);
    MatX<S> H(r, r), gradG = MatX<S>::Zero(r, r);
    const S invh2 = 1 / (ctx.h * ctx.h);
    for (int a = 0; a < r; ++a) {
        const auto [ax, ay] = ctx.exps[a];
        for (int c = a; c < r; ++c) {
            const auto [cx, cy] = ctx.exps[c];
            H(a, c) = H(c, a) = table(ax + cx, ay + cy);
            S g = 0;
            if (ax > 0 && cx > 0) g += S(ax) * S(cx) * table(ax + cx - 2, ay + cy);
            if (ay > 0 && cy > 0) g += S(ay) * S(cy) * table(ax + cx, ay + cy - 2);
            gradG(a, c) = gradG(c, a) = invh2 * g;
        }
    }

    // D: DoFs of the basis monomials (boundary evaluations + scaled H rows)
    MatX<S> D(total, r);
    {
        const std::vector<Point> nodes = boundary_node_coords(points, k);
        for (int i = 0; i < kN; ++i) {
            const Pt<S> p{S(nodes[i].x), S(nodes[i].y)};
            for (int a = 0; a < r; ++a) D(i, a) = ctx.mono(a, p);
        }
        if (nm > 0) D.bottomRows(nm) = H.topRows(nm) / ctx.area;
    }

    MatX<S> pi_b;      // Pi_d / Pi_S / (enhanced: Pi_nabla)
    MatX<S> lift = MatX<S>::Zero(kN + r, total);
    lift.topLeftCorner(kN, kN).setIdentity();
    for (int alpha = 0; alpha < nm; ++alpha) lift(kN + alpha, kN + alpha) = 1;
    MatX<S> pi_nabla;

    if (enhanced) {
        // Pi_nabla first (computable from enhanced DoFs), then the lift
        pi_nabla = ritz_system_enlarged(ctx, gradG, H) * lift;
        pi_b = pi_nabla;
        const MatX<S> proj_moments = (H * pi_nabla) / ctx.area;
        for (int alpha = nm; alpha < r; ++alpha)
            lift.row(kN + alpha) = proj_moments.row(alpha);
    } else {
        if (ctx.layout.deficient) {
            pi_b = solve_equilibrated_ls<S>(
                D, MatX<S>::Identity(total, total), "serendipity DoF Gram");
        } else {
            MatX<S> Smat, W;
            boundary_sample_system(ctx, Smat, W);
            pi_b = solve_equilibrated_ls<S>(
                Smat, W, "boundary Gram (nearly aligned edges?)");
        }
        const MatX<S> proj_moments = (H * pi_b) / ctx.area;
        for (int alpha = nm; alpha < r; ++alpha)
            lift.row(kN + alpha) = proj_moments.row(alpha);
        pi_nabla = ritz_system_enlarged(ctx, gradG, H) * lift;
    }

    // L2 projector from the lifted moments; in the ideal serendipity case the
    // identity Pi0 = Pi_d holds exactly, so skip the H round trip
    MatX<S> pi_zero;
    if (!enhanced && nm == 0)
        pi_zero = pi_b;
    else
        pi_zero = solve_spd_refined<S>(H, ctx.area * lift.bottomRows(r),
                                       "monomial mass matrix");

    const MatX<S> stab_nabla = MatX<S>::Identity(total, total) - D * pi_nabla;
    const MatX<S> stab_zero = MatX<S>::Identity(total, total) - D * pi_zero;
    MatX<S> stiffness =
        S(eps) * (pi_nabla.transpose() * gradG * pi_nabla +
                  stab_nabla.transpose() * stab_nabla);
    MatX<S> mass = pi_zero.transpose() * H * pi_zero +
                   ctx.area * stab_zero.transpose() * stab_zero;
    stiffness = ((stiffness + stiffness.transpose()) / 2).eval();
    mass = ((mass + mass.transpose()) / 2).eval();

    // package as double; the runtime quadrature cache is rebuilt in double
    ElementOperators ops{ctx.layout,
                         geo,
                         ScaledMonomialBasis(geo.centroid, geo.diameter, k),
                         boundary_node_coords(points, k),
                         polygon_quadrature(points, 2 * k + 2)};
    ops.mono_at_rule = ops.basis.eval_all(ops.rule.points);
    ops.mass_monomials = to_double(H);
    ops.grad_gram = to_double(gradG);
    ops.dof_of_monomials = to_double(D);
    ops.pi_boundary = to_double(pi_b);
    ops.lift = to_double(lift);
    ops.pi_nabla = to_double(pi_nabla);
    ops.pi_zero = to_double(pi_zero);
    ops.stiffness = to_double(stiffness);
    ops.mass = to_double(mass);
    return ops;
}

// raw monomials lose too many digits past k = 4; switch the small dense
// per-cell builds to quad precision there
constexpr int kExtendedPrecisionDegree = 5;

}  // namespace

ElementOperators build_element_operators(std::span<const Point> points,
                                         const CellGeometry& geo, int k,
                                         double eps) {
    if (k >= kExtendedPrecisionDegree)
        return build_impl<float128>(points, geo, k, eps, false);
    return build_impl<double>(points, geo, k, eps, false);
}

ElementOperators build_enhanced_element_operators(std::span<const Point> points,
                                                  const CellGeometry& geo, int k,
                                                  double eps) {
    if (k >= kExtendedPrecisionDegree)
        return build_impl<float128>(points, geo, k, eps, true);
    return build_impl<double>(points, geo, k, eps, true);
}

Eigen::MatrixXd boundary_projector(std::span<const Point> points,
                                   const CellGeometry& geo, int k) {
    if (k >= geo.eta)
        throw Error(ErrorCode::Conditioning,
                    "boundary projector needs k < eta_E (k=" + std::to_string(k) +
                        ", eta=" + std::to_string(geo.eta) + ")");
    if (k >= kExtendedPrecisionDegree) {
        CellCtx<float128> ctx(points, geo, k, geo.eta);
        MatX<float128> Smat, W;
        boundary_sample_system(ctx, Smat, W);
        return to_double(solve_equilibrated_ls<float128>(
            Smat, W, "boundary Gram (nearly aligned edges?)"));
    }
    CellCtx<double> ctx(points, geo, k, geo.eta);
    MatX<double> Smat, W;
    boundary_sample_system(ctx, Smat, W);
    return solve_equilibrated_ls<double>(
        Smat, W, "boundary Gram (nearly aligned edges?)");
}

Eigen::MatrixXd serendipity_projector(std::span<const Point> points,
                                      const CellGeometry& geo, int k) {
    const ElementOperators ops = build_element_operators(points, geo, k, 1.0);
    if (ops.layout.deficient) return ops.pi_boundary;
    // k < eta: build the Euclidean-DoF least-squares projector explicitly
    return to_double(solve_equilibrated_ls<double>(
        ops.dof_of_monomials,
        Eigen::MatrixXd::Identity(ops.layout.total, ops.layout.total),
        "serendipity DoF Gram"));
}

Eigen::VectorXd ElementOperators::dof_vector(
    const std::function<double(Point)>& g) const {
    Eigen::VectorXd chi(layout.total);
    for (int i = 0; i < layout.n_boundary; ++i) chi[i] = g(boundary_nodes[i]);
    if (layout.n_moments > 0) {
        Eigen::VectorXd gq(rule.points.size());
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            gq[static_cast<long>(q)] = g(rule.points[q]);
        for (int alpha = 0; alpha < layout.n_moments; ++alpha)
            chi[layout.n_boundary + alpha] =
                (rule.weights.cwiseProduct(gq).cwiseProduct(
                     mono_at_rule.col(alpha)))
                    .sum() /
                geo.area;
    }
    return chi;
}

Eigen::VectorXd ElementOperators::pi_zero_at_rule(
    const Eigen::VectorXd& local_dofs) const {
    return mono_at_rule * (pi_zero * local_dofs);
}

}  // namespace svem
