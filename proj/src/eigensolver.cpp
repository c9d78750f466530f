#include "chfem/eigensolver.hpp"

#include "chfem/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace chfem {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct Problem {
    SpMat a, m;
    Vec m_one;       // M * 1
    double one_m_one; // 1' M 1

    explicit Problem(const SparseMatrix& aa, const SparseMatrix& mm) : a(aa.to_eigen()), m(mm.to_eigen()) {
        m_one = m * Vec::Ones(m.rows());
        one_m_one = m_one.sum();
    }

    void deflate(Eigen::Ref<Mat> x) const {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double c = m_one.dot(x.col(j)) / one_m_one;
            x.col(j).array() -= c;
        }
    }
};

// sign so the first entry above 1e-6 max|v| is positive
void fix_sign(Eigen::Ref<Vec> v) {
    const double mx = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-6 * mx) {
            if (v(i) < 0) v = -v;
            return;
        }
}

bool same_cluster(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

// M-orthonormal Gram-Schmidt of the columns of w, in order, two passes
void m_gram_schmidt(const SpMat& m, Mat& w) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            const Vec mw = m * w.col(j);
            for (Eigen::Index i = 0; i < j; ++i) w.col(j) -= w.col(i).dot(mw) * w.col(i);
        }
        w.col(j) /= std::sqrt(w.col(j).dot(m * w.col(j)));
    }
}

// Canonical basis of one eigenspace (columns of v, M-orthonormal).
void canonicalize_cluster(const Problem& p, const SpMat* tb, Mat& v) {
    const Eigen::Index k = v.cols();
    if (k == 1) return;
    if (tb) {
        const Mat b = v.transpose() * (*tb * v);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (b + b.transpose()));
        v = v * es.eigenvectors();
        return;
    }
    // row pivots chosen from rotation-invariant row norms
    Mat r = v;
    std::vector<Eigen::Index> piv;
    for (Eigen::Index j = 0; j < k; ++j) {
        const Vec norms = r.rowwise().norm();
        const double mx = norms.maxCoeff();
        Eigen::Index best = 0;
        for (Eigen::Index i = 0; i < norms.size(); ++i)
            if (norms(i) >= (1.0 - 1e-9) * mx) {
                best = i;
                break;
            }
        piv.push_back(best);
        const Eigen::RowVectorXd q = r.row(best) / r.row(best).norm();
        r -= (r * q.transpose()) * q;
    }
    Mat g(k, k);
    for (Eigen::Index j = 0; j < k; ++j) g.row(j) = v.row(piv[static_cast<std::size_t>(j)]);
    Mat w = v * g.inverse();
    m_gram_schmidt(p.m, w);
    v = w;
}

std::vector<EigenPair> finish(const Problem& p, const SpMat* tb, const Vec& rho, Mat v, int count) {
    // group clusters, canonicalize, then normalize and sign
    const Eigen::Index total = rho.size();
    std::vector<EigenPair> out;
    Eigen::Index i = 0;
    while (i < total && static_cast<int>(out.size()) < count) {
        Eigen::Index j = i + 1;
        while (j < total && same_cluster(rho(i), rho(j))) ++j;
        Mat block = v.middleCols(i, j - i);
        canonicalize_cluster(p, tb, block);
        for (Eigen::Index c = 0; c < block.cols(); ++c) {
            Vec x = block.col(c);
            p.deflate(x);
            x /= std::sqrt(x.dot(p.m * x));
            fix_sign(x);
            EigenPair e;
            e.rho = x.dot(p.a * x);
            e.v.assign(x.data(), x.data() + x.size());
            out.push_back(std::move(e));
        }
        i = j;
    }
    if (static_cast<int>(out.size()) > count) out.resize(static_cast<std::size_t>(count));
    return out;
}

void check_inputs(const SparseMatrix& a, const SparseMatrix& m, int count) {
    if (a.n_rows() != a.n_cols() || m.n_rows() != a.n_rows() || m.n_cols() != a.n_cols())
        throw ParameterError("eigenpairs: A and M must be square and of equal size");
    if (count < 0 || static_cast<std::size_t>(count) + 1 > a.n_rows())
        throw ParameterError("eigenpairs: count must lie in [0, n-1]");
}

} // namespace

double eigen_residual(const SparseMatrix& a, const SparseMatrix& m, const EigenPair& p) {
    const auto av = a * std::span<const double>(p.v);
    const auto mv = m * std::span<const double>(p.v);
    double r = 0.0, nm = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = av[i] - p.rho * mv[i];
        r += d * d;
        nm += mv[i] * mv[i];
    }
    return std::sqrt(r / nm);
}

std::vector<EigenPair> dense_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int count,
                                        const SparseMatrix* tiebreak) {
    check_inputs(a, m, count);
    Problem p(a, m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a.to_dense(), m.to_dense());
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    const Eigen::Index n = es.eigenvalues().size();
    // index 0 is the constant mode
    const Vec rho = es.eigenvalues().tail(n - 1);
    const Mat v = es.eigenvectors().rightCols(n - 1);
    SpMat tb;
    if (tiebreak) tb = tiebreak->to_eigen();
    return finish(p, tiebreak ? &tb : nullptr, rho, v, count);
}

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int count,
                                           const SparseMatrix* tiebreak, const EigenOptions& opt) {
    check_inputs(a, m, count);
    if (count == 0) return {};
    if (opt.block < 1) throw ParameterError("eigenpairs: block must be positive");
    const Eigen::Index n = static_cast<Eigen::Index>(a.n_rows());
    const Eigen::Index b = opt.block;
    const Eigen::Index max_basis =
        opt.max_basis > 0 ? opt.max_basis : std::max<Eigen::Index>(6 * count + 10 * b, 60);
    if (n - 1 <= max_basis + b) return dense_eigenpairs(a, m, count, tiebreak);

    Problem p(a, m);
    SpMat tb;
    if (tiebreak) tb = tiebreak->to_eigen();

    // shift-invert with sigma = -1: K = (A + M)^{-1} M has eigenvalues 1/(1 + rho)
    Eigen::SimplicialLDLT<SpMat> ldlt(p.a + p.m);
    if (ldlt.info() != Eigen::Success) throw NumericError("eigenpairs: factorization of A + M failed");

    Mat q(n, 0), aq(n, 0), mq(n, 0);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto random_block = [&](Eigen::Index cols) {
        Mat x(n, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < n; ++i) x(i, j) = dist(rng);
        return x;
    };

    // orthogonalize x against q, then within itself; appends surviving columns
    auto append = [&](Mat x) {
        p.deflate(x);
        for (int pass = 0; pass < 2; ++pass)
            if (q.cols() > 0) x -= q * (mq.transpose() * x);
        Eigen::Index added = 0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            Vec y = x.col(j);
            const double before = std::sqrt(std::max(0.0, y.dot(p.m * y)));
            for (int pass = 0; pass < 2; ++pass) {
                if (q.cols() > 0) y -= q * (mq.transpose() * y);
                p.deflate(y);
            }
            const double nrm = std::sqrt(std::max(0.0, y.dot(p.m * y)));
            if (!(nrm > 1e-10 * before) || nrm == 0.0) continue;
            y /= nrm;
            const Vec my = p.m * y;
            const Vec ay = p.a * y;
            q.conservativeResize(Eigen::NoChange, q.cols() + 1);
            mq.conservativeResize(Eigen::NoChange, mq.cols() + 1);
            aq.conservativeResize(Eigen::NoChange, aq.cols() + 1);
            q.col(q.cols() - 1) = y;
            mq.col(mq.cols() - 1) = my;
            aq.col(aq.cols() - 1) = ay;
            ++added;
        }
        return added;
    };

    if (append(random_block(b)) == 0) throw NumericError("eigenpairs: degenerate start block");
    Mat last = q;
    double worst = 0.0;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        while (q.cols() + b <= max_basis) {
            Mat x = ldlt.solve(p.m * last);
            const Eigen::Index before = q.cols();
            Eigen::Index added = append(std::move(x));
            if (added == 0) added = append(random_block(b));
            if (added == 0) break;
            last = q.middleCols(before, added);

            // Rayleigh-Ritz on the pencil (Q'AQ, I)
            if (q.cols() < count + b) continue;
            const Mat h = q.transpose() * aq;
            Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.transpose()));
            const Vec& theta = es.eigenvalues();
            // wanted: count values plus the rest of a cluster cut by the boundary
            Eigen::Index want = count;
            while (want < theta.size() && same_cluster(theta(want - 1), theta(want))) ++want;
            if (want + b > q.cols()) continue;
            const Mat s = es.eigenvectors().leftCols(want);
            const Mat r = aq * s - (mq * s) * theta.head(want).asDiagonal();
            const Mat ms = mq * s;
            worst = 0.0;
            for (Eigen::Index j = 0; j < want; ++j)
                worst = std::max(worst, r.col(j).norm() / (std::max(1.0, theta(j)) * ms.col(j).norm()));
            if (worst <= opt.tol) return finish(p, tiebreak ? &tb : nullptr, theta.head(want), q * s, count);
        }
        // restart from the leading Ritz vectors
        const Mat h = q.transpose() * aq;
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.transpose()));
        const Eigen::Index keep = std::min<Eigen::Index>(q.cols(), count + 2 * b);
        const Mat s = es.eigenvectors().leftCols(keep);
        q = q * s;
        aq = aq * s;
        mq = mq * s;
        last = q.rightCols(std::min(b, keep));
    }
    std::ostringstream os;
    os << "eigenpairs: no convergence after " << opt.max_restarts << " restarts, relative residual " << worst;
    throw NumericError(os.str());
}

std::vector<double> mode_initial_data(const std::vector<EigenPair>& pairs, const std::vector<double>& combo,
                                      double amplitude) {
    if (combo.size() != pairs.size()) throw ParameterError("mode_initial_data: combo length differs from pairs");
    if (pairs.empty()) return {};
    std::vector<double> s(pairs.front().v.size(), 0.0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (pairs[k].v.size() != s.size()) throw ParameterError("mode_initial_data: vectors differ in length");
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += combo[k] * pairs[k].v[i];
    }
    double mx = 0.0;
    for (double x : s) mx = std::max(mx, std::abs(x));
    if (mx == 0.0 || amplitude == 0.0) return std::vector<double>(s.size(), 0.0);
    for (double& x : s) x *= amplitude / mx;
    return s;
}

} // namespace chfem
