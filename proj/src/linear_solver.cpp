#include "svem/linear_solver.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "svem/errors.hpp"

namespace svem {

namespace {

// Left-looking incomplete Cholesky of A + shift*diag(A): keeps entries with
// |l_ij| * l_jj > drop_tol * sqrt(a_ii a_jj). Returns false on breakdown.
bool ict_factor(const SparseMatrix& A, double drop_tol, double shift,
                SparseMatrix& L) {
    const int n = static_cast<int>(A.rows());
    std::vector<double> diag(n);
    for (int j = 0; j < n; ++j) diag[j] = A.coeff(j, j);

    // dynamic columns of L (row-sorted), plus the classic linked lists:
    // list_head[i] = first column whose next unconsumed entry sits in row i
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    std::vector<int> list_head(n, -1), list_next(n, -1), col_ptr(n, 0);
    std::vector<double> work(n, 0.0);
    std::vector<int> pattern;

    for (int j = 0; j < n; ++j) {
        pattern.clear();
        for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
            if (it.row() < j) continue;
            work[it.row()] = it.value();
            pattern.push_back(static_cast<int>(it.row()));
        }
        work[j] += shift * diag[j];

        int k = list_head[j];
        while (k != -1) {
            const int next_k = list_next[k];
            const double ljk = cols[k][col_ptr[k]].second;
            for (std::size_t idx = col_ptr[k]; idx < cols[k].size(); ++idx) {
                const auto& [i, v] = cols[k][idx];
                if (work[i] == 0.0 && i != j) {
                    bool seen = false;
                    for (int p : pattern)
                        if (p == i) { seen = true; break; }
                    if (!seen) pattern.push_back(i);
                }
                work[i] -= ljk * v;
            }
            ++col_ptr[k];
            if (static_cast<std::size_t>(col_ptr[k]) < cols[k].size()) {
                const int row = cols[k][col_ptr[k]].first;
                list_next[k] = list_head[row];
                list_head[row] = k;
            }
            k = next_k;
        }

        const double d = work[j];
        if (!(d > 0.0)) {
            for (int p : pattern) work[p] = 0.0;
            work[j] = 0.0;
            return false;
        }
        const double ljj = std::sqrt(d);
        std::vector<std::pair<int, double>>& col = cols[j];
        col.emplace_back(j, ljj);
        std::sort(pattern.begin(), pattern.end());
        for (int i : pattern) {
            if (i == j) { work[i] = 0.0; continue; }
            const double lij = work[i] / ljj;
            work[i] = 0.0;
            if (std::abs(lij) * ljj >
                drop_tol * std::sqrt(std::abs(diag[i] * diag[j])))
                col.emplace_back(i, lij);
        }
        work[j] = 0.0;
        if (col.size() > 1) {
            col_ptr[j] = 1;
            const int row = col[1].first;
            list_next[j] = list_head[row];
            list_head[row] = j;
        }
    }

    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < n; ++j)
        for (const auto& [i, v] : cols[j]) trip.emplace_back(i, j, v);
    L.resize(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    L.makeCompressed();
    return true;
}

}  // namespace

IncompleteCholesky::IncompleteCholesky(const SparseMatrix& A, double drop_tol) {
    double shift = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        if (ict_factor(A, drop_tol, shift, L_)) return;
        shift = (shift == 0.0) ? 1e-3 : 2.0 * shift;
    }
    throw Error(ErrorCode::SolverFailure,
                "incomplete Cholesky breakdown persists under diagonal shifts");
}

Eigen::VectorXd IncompleteCholesky::apply(const Eigen::VectorXd& r) const {
    Eigen::VectorXd y = L_.triangularView<Eigen::Lower>().solve(r);
    return L_.transpose().triangularView<Eigen::Upper>().solve(y);
}

LinearStepOperator::LinearStepOperator(const SparseMatrix& lhs,
                                       LinearSolveMode mode, double tol,
                                       double ic_drop_tol)
    : lhs_(lhs), mode_(mode), tol_(tol) {
    if (mode_ == LinearSolveMode::Direct) {
        direct_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(lhs_);
        if (direct_->info() != Eigen::Success)
            throw Error(ErrorCode::SolverFailure,
                        "sparse factorization of the step matrix failed");
    } else {
        precond_ = std::make_unique<IncompleteCholesky>(lhs_, ic_drop_tol);
    }
}

Eigen::VectorXd LinearStepOperator::solve(const Eigen::VectorXd& rhs) const {
    if (mode_ == LinearSolveMode::Direct) return direct_->solve(rhs);

    // preconditioned conjugate gradients
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) return Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd z = precond_->apply(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const int max_iter = 10 * static_cast<int>(rhs.size()) + 100;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd Ap = lhs_ * p;
        const double alpha = rz / p.dot(Ap);
        x += alpha * p;
        r -= alpha * Ap;
        if (r.norm() <= tol_ * rhs_norm) return x;
        z = precond_->apply(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw Error(ErrorCode::SolverFailure,
                "CG did not reach tolerance; relative residual " +
                    std::to_string(r.norm() / rhs_norm));
}

}  // namespace svem
