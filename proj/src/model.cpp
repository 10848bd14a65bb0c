#include "mwlse/model.hpp"

#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace mwlse {

namespace {

// Layouts are tiny and depend only on (family, d, M, diagonal_A); cache them.
std::vector<PackEntry> build_layout(const ModelSpec& spec) {
    std::vector<PackEntry> layout;
    layout.reserve(static_cast<std::size_t>(spec.param_count()));
    const int d = spec.d;
    const int q = spec.blocks();
    for (int i = 0; i < spec.effective_dim(); ++i) layout.push_back({'c', i, i});
    for (int j = 0; j < q; ++j) {
        const int off = j * d;
        if (spec.diagonal_A) {
            for (int i = 0; i < d; ++i) layout.push_back({'a', off + i, off + i});
        } else {
            for (int i = 0; i < d; ++i)
                for (int l = 0; l < d; ++l) layout.push_back({'a', off + i, off + l});
        }
    }
    for (int j = 0; j < q; ++j) {
        const int off = j * d;
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) layout.push_back({'b', off + i, off + l});
    }
    return layout;
}

std::tuple<int, int, int, bool> layout_key(const ModelSpec& spec) {
    return {static_cast<int>(spec.family), spec.d, spec.M, spec.diagonal_A};
}

void require_shapes(const Theta& theta, const ModelSpec& spec) {
    const auto de = static_cast<arma::uword>(spec.effective_dim());
    if (theta.c.n_elem != de || theta.A.n_rows != de || theta.A.n_cols != de ||
        theta.B.n_rows != de || theta.B.n_cols != de) {
        std::ostringstream os;
        os << "parameter shapes do not match spec (effective dim " << de << ")";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

const std::vector<PackEntry>& pack_layout(const ModelSpec& spec) {
    static std::map<std::tuple<int, int, int, bool>, std::vector<PackEntry>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.try_emplace(layout_key(spec));
    if (inserted) it->second = build_layout(spec);
    return it->second;
}

std::vector<std::string> param_names(const ModelSpec& spec) {
    std::vector<std::string> names;
    for (const PackEntry& e : pack_layout(spec)) {
        std::ostringstream os;
        if (e.kind == 'c') {
            os << "c[" << e.row + 1 << "]";
        } else {
            os << (e.kind == 'a' ? "A[" : "B[") << e.row + 1 << "," << e.col + 1 << "]";
        }
        names.push_back(os.str());
    }
    return names;
}

arma::vec pack_params(const Theta& theta, const ModelSpec& spec) {
    require_shapes(theta, spec);
    const auto& layout = pack_layout(spec);
    arma::vec flat(layout.size());
    for (std::size_t h = 0; h < layout.size(); ++h) {
        const PackEntry& e = layout[h];
        if (e.kind == 'c') flat(h) = theta.c(e.row);
        else if (e.kind == 'a') flat(h) = theta.A(e.row, e.col);
        else flat(h) = theta.B(e.row, e.col);
    }
    return flat;
}

Theta unpack_params(const arma::vec& flat, const ModelSpec& spec) {
    const auto& layout = pack_layout(spec);
    if (flat.n_elem != layout.size()) {
        std::ostringstream os;
        os << "flat parameter vector has length " << flat.n_elem << ", expected "
           << layout.size();
        throw std::invalid_argument(os.str());
    }
    const auto de = static_cast<arma::uword>(spec.effective_dim());
    Theta theta;
    theta.c.zeros(de);
    theta.A.zeros(de, de);
    theta.B.zeros(de, de);
    for (std::size_t h = 0; h < layout.size(); ++h) {
        const PackEntry& e = layout[h];
        if (e.kind == 'c') theta.c(e.row) = flat(h);
        else if (e.kind == 'a') theta.A(e.row, e.col) = flat(h);
        else theta.B(e.row, e.col) = flat(h);
    }
    return theta;
}

namespace {

void check_nonneg(const Theta& theta, ConstraintReport& rep) {
    auto add = [&rep](const std::string& what, double slack) {
        rep.worst_slack = std::min(rep.worst_slack, slack);
        if (slack < 0.0) {
            rep.ok = false;
            rep.violations.push_back({what, slack});
        }
    };
    for (arma::uword i = 0; i < theta.c.n_elem; ++i) {
        std::ostringstream os;
        os << "c[" << i + 1 << "] > 0";
        add(os.str(), theta.c(i) - kConstraintTol);
    }
    for (arma::uword i = 0; i < theta.A.n_rows; ++i)
        for (arma::uword l = 0; l < theta.A.n_cols; ++l) {
            {
                std::ostringstream os;
                os << "A[" << i + 1 << "," << l + 1 << "] >= 0";
                add(os.str(), theta.A(i, l) + kConstraintTol);
            }
            std::ostringstream os;
            os << "B[" << i + 1 << "," << l + 1 << "] >= 0";
            add(os.str(), theta.B(i, l) + kConstraintTol);
        }
}

double block_sum_inf_norm(const ModelSpec& spec, const Theta& theta) {
    // || sum_j (C_j + A_j + B_j) ||_inf over the d x d category blocks;
    // with one block this is ||C + A + B||_inf.
    const int d = spec.d;
    const int q = spec.blocks();
    arma::mat total(d, d, arma::fill::zeros);
    for (int j = 0; j < q; ++j) {
        const arma::span sp(static_cast<arma::uword>(j * d),
                            static_cast<arma::uword>((j + 1) * d - 1));
        arma::mat blk = theta.A(sp, sp) + theta.B(sp, sp);
        blk.diag() += theta.c.subvec(sp);
        total += arma::abs(blk);
    }
    return arma::norm(total, "inf");
}

void check_block_diagonal(const ModelSpec& spec, const Theta& theta, ConstraintReport& rep) {
    const int d = spec.d;
    const int de = spec.effective_dim();
    double off_mass = 0.0;
    for (int i = 0; i < de; ++i)
        for (int l = 0; l < de; ++l)
            if (i / d != l / d)
                off_mass += std::abs(theta.A(i, l)) + std::abs(theta.B(i, l));
    if (off_mass > kConstraintTol) {
        rep.ok = false;
        rep.violations.push_back({"A and B block-diagonal", -off_mass});
        rep.worst_slack = std::min(rep.worst_slack, -off_mass);
    }
}

}  // namespace

ConstraintReport check_constraints(const ModelSpec& spec, const Theta& theta) {
    require_shapes(theta, spec);
    ConstraintReport rep;
    check_nonneg(theta, rep);
    if (spec.family == Family::binary || spec.family == Family::categorical_stacked) {
        const double norm = block_sum_inf_norm(spec, theta);
        const double slack = (1.0 - kConstraintTol) - norm;
        rep.worst_slack = std::min(rep.worst_slack, slack);
        if (slack < 0.0) {
            std::ostringstream os;
            os << "||C+A+B||_inf < 1 (got " << norm << ")";
            rep.ok = false;
            rep.violations.push_back({os.str(), slack});
        }
    }
    if (spec.family == Family::categorical_stacked) check_block_diagonal(spec, theta, rep);
    return rep;
}

arma::vec stationary_mean(const Theta& theta) {
    const arma::uword de = theta.c.n_elem;
    arma::mat lhs = arma::eye(de, de) - theta.A - theta.B;
    arma::vec mu;
    if (!arma::solve(mu, lhs, theta.c, arma::solve_opts::no_approx)) {
        throw std::domain_error("stationary_mean: I - A - B is singular");
    }
    return mu;
}

arma::mat mean_recursion(const ModelSpec& spec, const Theta& theta,
                         const arma::mat& Y, const arma::vec& mean_init) {
    require_shapes(theta, spec);
    const auto de = static_cast<arma::uword>(spec.effective_dim());
    if (Y.n_cols != de) throw std::invalid_argument("mean_recursion: Y has wrong dimension");
    if (Y.n_rows < 2) throw std::invalid_argument("mean_recursion: need T >= 2");
    if (mean_init.n_elem != de)
        throw std::invalid_argument("mean_recursion: mean_init has wrong dimension");

    arma::mat path(Y.n_rows, de);
    path.row(0) = mean_init.t();
    for (arma::uword t = 1; t < Y.n_rows; ++t) {
        path.row(t) = (theta.c + theta.A * path.row(t - 1).t() + theta.B * Y.row(t - 1).t()).t();
    }
    if (!path.is_finite()) throw std::domain_error("mean_recursion: non-finite mean value");
    return path;
}

arma::cube mean_jacobian(const ModelSpec& spec, const Theta& theta,
                         const arma::mat& Y, const arma::vec& mean_init) {
    require_shapes(theta, spec);
    const auto de = static_cast<arma::uword>(spec.effective_dim());
    if (Y.n_cols != de) throw std::invalid_argument("mean_jacobian: Y has wrong dimension");
    arma::cube J(de, static_cast<arma::uword>(spec.param_count()), Y.n_rows);
    detail::scan_mean_jacobian(spec, theta, Y, mean_init,
                               [&J](arma::uword t, const arma::vec&, const arma::mat& Jt) {
                                   J.slice(t) = Jt;
                               });
    if (!J.is_finite()) throw std::domain_error("mean_jacobian: non-finite value");
    return J;
}

arma::vec sample_mean_init(const arma::mat& Y) {
    return arma::mean(Y, 0).t();
}

void validate_series(const ModelSpec& spec, const arma::mat& Y) {
    if (Y.n_rows < 2) throw std::invalid_argument("series needs T >= 2");
    if (Y.n_cols != static_cast<arma::uword>(spec.effective_dim()))
        throw std::invalid_argument("series dimension does not match spec");
    if (!Y.is_finite()) throw std::invalid_argument("series contains non-finite values");
    if (spec.family == Family::count) {
        for (arma::uword i = 0; i < Y.n_elem; ++i) {
            const double v = Y(i);
            if (v < 0.0 || v != std::floor(v))
                throw std::invalid_argument("count series must hold non-negative integers");
        }
    } else {
        for (arma::uword i = 0; i < Y.n_elem; ++i) {
            if (Y(i) != 0.0 && Y(i) != 1.0)
                throw std::invalid_argument("binary series must hold only 0 or 1");
        }
    }
}

}  // namespace mwlse
