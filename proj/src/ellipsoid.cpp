#include "malab/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace malab {

Ellipsoid mvie_fixed_center(const std::vector<Halfspace>& hs,
                            const Vec3& center, int dim) {
    Ellipsoid e;
    e.dim = dim;
    e.center = center;
    const int d = dim;
    const std::size_t m = hs.size();
    if (d < 1 || d > 3 || m < static_cast<std::size_t>(d)) return e;

    // q_i = a_i / slack_i; the constraint q^T M q <= 1 encodes that the
    // ellipsoid stays inside facet i.
    Eigen::MatrixXd Q(d, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const double slack = hs[i].b - hs[i].a.head(3).dot(center);
        if (!(slack > 0)) return e;  // center on or outside facet i
        for (int k = 0; k < d; ++k) Q(k, static_cast<Eigen::Index>(i)) = hs[i].a[k] / slack;
    }

    Eigen::VectorXd w =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
    Eigen::MatrixXd S(d, d), Sinv(d, d);
    Eigen::VectorXd kappa(static_cast<Eigen::Index>(m));
    const double tol_gap = 1e-9;
    const int max_iter = 10000;
    double gap = std::numeric_limits<double>::infinity();

    int it = 0;
    for (; it < max_iter; ++it) {
        S.setZero();
        for (Eigen::Index i = 0; i < Q.cols(); ++i)
            if (w[i] > 0) S.noalias() += w[i] * Q.col(i) * Q.col(i).transpose();
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) {
            // Direction set does not span: polytope unbounded through center.
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
            const auto& sv = svd.singularValues();
            int r = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i)
                if (sv[i] > 1e-12 * sv[0]) ++r;
            e.rank = r;
            return e;
        }
        Sinv = llt.solve(Eigen::MatrixXd::Identity(d, d));
        double kmax = -1, kmin_sup = std::numeric_limits<double>::infinity();
        Eigen::Index jmax = 0, jmin = -1;
        for (Eigen::Index i = 0; i < Q.cols(); ++i) {
            kappa[i] = Q.col(i).dot(Sinv * Q.col(i));
            if (kappa[i] > kmax) { kmax = kappa[i]; jmax = i; }
            if (w[i] > 0 && kappa[i] < kmin_sup) { kmin_sup = kappa[i]; jmin = i; }
        }
        gap = std::max(kmax / d - 1.0, (d - kmin_sup) / d);
        if (gap < tol_gap) break;

        if (kmax - d >= d - kmin_sup || jmin < 0 || w[jmin] >= 1.0) {
            const double k = kappa[jmax];
            const double lam = (k - d) / (d * (k - 1.0));
            w *= (1.0 - lam);
            w[jmax] += lam;
        } else {
            const double k = kappa[jmin];
            const double cap = w[jmin] / (1.0 - w[jmin]);
            double lam = cap;
            if (k > 1.0 + 1e-14) lam = std::min((d - k) / (d * (k - 1.0)), cap);
            w *= (1.0 + lam);
            w[jmin] -= lam;
            if (w[jmin] < 1e-300) w[jmin] = 0;
        }
        if ((it & 63) == 63) w /= w.sum();
    }
    e.iterations = it;
    e.gap = gap;

    double kmax = 0;
    for (Eigen::Index i = 0; i < Q.cols(); ++i)
        kmax = std::max(kmax, Q.col(i).dot(Sinv * Q.col(i)));
    Eigen::MatrixXd M = Sinv / kmax;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) return e;
    // Eigenvalues ascending; record axes by descending semi-length.
    for (int k = 0; k < d; ++k) {
        const int src = d - 1 - k;
        const double lam = std::max(es.eigenvalues()[src], 0.0);
        e.semi[k] = std::sqrt(lam);
        e.axes.col(k).setZero();
        e.axes.col(k).head(d) = es.eigenvectors().col(src);
    }
    for (int k = d; k < 3; ++k) e.axes.col(k) = Eigen::Vector3d::Unit(k);
    e.shape.setZero();
    e.shape.topLeftCorner(d, d) = M;
    e.rank = d;
    e.ok = true;
    return e;
}

double Ellipsoid::gauge(const Vec3& p) const {
    const Vec3 y = p - center;
    double s = 0;
    double span_scale = semi[0];
    for (int k = 0; k < 3; ++k) {
        const double t = axes.col(k).dot(y);
        if (k < rank && semi[k] > 0) {
            s += (t / semi[k]) * (t / semi[k]);
        } else if (std::abs(t) > 1e-9 * (1.0 + span_scale)) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return std::sqrt(s);
}

}  // namespace malab
