// model.cpp — grids, built-in systems, and transfer constructors
#include "ensctl/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ensctl {

void ParameterBox::validate() const {
    if (lower.size() != upper.size())
        throw std::invalid_argument("ParameterBox: lower/upper dimension mismatch");
    if (lower.size() == 0)
        throw std::invalid_argument("ParameterBox: dimension must be >= 1");
    for (Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw std::invalid_argument("ParameterBox: non-finite bound");
        if (lower[i] > upper[i])
            throw std::invalid_argument("ParameterBox: lower > upper on axis " + std::to_string(i));
    }
}

double ParameterBox::measure() const {
    double meas = 1.0;
    for (Index i = 0; i < lower.size(); ++i) {
        const double len = upper[i] - lower[i];
        if (len > 0.0) meas *= len;
    }
    return meas;
}

TimeGrid make_time_grid(double T, Index N) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw std::invalid_argument("make_time_grid: T must be positive and finite");
    if (N < 1)
        throw std::invalid_argument("make_time_grid: N must be >= 1");
    TimeGrid grid;
    grid.T = T;
    grid.N = N;
    grid.delta = T / static_cast<double>(N);
    grid.nodes.resize(static_cast<size_t>(N) + 1);
    for (Index k = 0; k <= N; ++k)
        grid.nodes[static_cast<size_t>(k)] =
            T * (static_cast<double>(k) / static_cast<double>(N));
    return grid;
}

ParameterGrid make_parameter_grid(const ParameterBox& box, const std::vector<Index>& counts) {
    box.validate();
    const Index d = box.dim();
    if (static_cast<Index>(counts.size()) != d)
        throw std::invalid_argument("make_parameter_grid: counts size != box dimension");
    Index total = 1;
    for (Index c : counts) {
        if (c < 1) throw std::invalid_argument("make_parameter_grid: counts must be >= 1");
        total *= c;
    }

    ParameterGrid grid;
    grid.box = box;
    grid.counts = counts;
    grid.cell_measure = 1.0;
    for (Index i = 0; i < d; ++i) {
        const double len = box.upper[i] - box.lower[i];
        if (len > 0.0) grid.cell_measure *= len / static_cast<double>(counts[static_cast<size_t>(i)]);
    }

    grid.points.reserve(static_cast<size_t>(total));
    std::vector<Index> idx(static_cast<size_t>(d), 0);
    for (Index j = 0; j < total; ++j) {
        Vector p(d);
        for (Index i = 0; i < d; ++i) {
            const double len = box.upper[i] - box.lower[i];
            const double step = len / static_cast<double>(counts[static_cast<size_t>(i)]);
            p[i] = box.lower[i] + (static_cast<double>(idx[static_cast<size_t>(i)]) + 0.5) * step;
        }
        grid.points.push_back(std::move(p));
        // row-major increment, last axis fastest
        for (Index i = d; i-- > 0;) {
            if (++idx[static_cast<size_t>(i)] < counts[static_cast<size_t>(i)]) break;
            idx[static_cast<size_t>(i)] = 0;
        }
    }
    return grid;
}

Index grid_cell_index(const ParameterGrid& grid, const Vector& beta) {
    const Index d = grid.box.dim();
    if (beta.size() != d)
        throw std::invalid_argument("grid_cell_index: parameter dimension mismatch");
    Index flat = 0;
    for (Index i = 0; i < d; ++i) {
        const Index c = grid.counts[static_cast<size_t>(i)];
        const double len = grid.box.upper[i] - grid.box.lower[i];
        Index cell = 0;
        if (len > 0.0) {
            const double step = len / static_cast<double>(c);
            cell = static_cast<Index>(std::floor((beta[i] - grid.box.lower[i]) / step));
            cell = std::max<Index>(0, std::min<Index>(cell, c - 1));
        }
        flat = flat * c + cell;
    }
    return flat;
}

LinearEnsembleSystem harmonic_oscillator_system() {
    LinearEnsembleSystem sys;
    sys.n = 2;
    sys.m = 2;
    sys.d = 1;
    sys.label = "harmonic_oscillator";
    sys.eval_A = [](double, const Vector& beta) {
        const double w = beta[0];
        Matrix A(2, 2);
        A << 0.0, -w,
             w, 0.0;
        return A;
    };
    sys.eval_B = [](double, const Vector&) { return Matrix::Identity(2, 2).eval(); };
    return sys;
}

double draw_standard_normal(std::mt19937_64& engine) {
    const double u1 = static_cast<double>((engine() >> 11) + 1) * 0x1p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine() >> 11) * 0x1p-53;       // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

Matrix draw_matrix(std::mt19937_64& engine, Index rows, Index cols) {
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            M(i, j) = draw_standard_normal(engine);
    return M;
}

}  // namespace

LinearEnsembleSystem random_timevarying_system(std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    const Matrix A0 = draw_matrix(engine, 4, 4);
    const Matrix A1 = draw_matrix(engine, 4, 4);
    const Matrix A2 = draw_matrix(engine, 4, 4);
    const Matrix B0 = draw_matrix(engine, 4, 3);
    const Matrix B1 = draw_matrix(engine, 4, 3);
    const Matrix B2 = draw_matrix(engine, 4, 3);

    LinearEnsembleSystem sys;
    sys.n = 4;
    sys.m = 3;
    sys.d = 2;
    sys.label = "random_timevarying(seed=" + std::to_string(seed) + ")";
    sys.eval_A = [A0, A1, A2](double t, const Vector& beta) {
        return (A0 + std::sin(2.0 * std::numbers::pi * t) * A1 + beta[0] * A2).eval();
    };
    sys.eval_B = [B0, B1, B2](double t, const Vector& beta) {
        return (B0 + (1.0 / (1.0 + t)) * B1 + beta[1] * B2).eval();
    };
    return sys;
}

TransferSpec constant_transfer(const Vector& x0, const Vector& xF) {
    if (x0.size() != xF.size())
        throw std::invalid_argument("constant_transfer: x0/xF length mismatch");
    TransferSpec spec;
    spec.X0 = [x0](const Vector&) { return x0; };
    spec.XF = [xF](const Vector&) { return xF; };
    return spec;
}

TransferSpec curve_transfer(PlanarCurve curve0, PlanarCurve curveF, const ParameterGrid& pgrid) {
    const double total = static_cast<double>(pgrid.size());
    auto sample = [total, pgrid](const PlanarCurve& curve, const Vector& beta) {
        const Index j = grid_cell_index(pgrid, beta);
        const Eigen::Vector2d p = curve(static_cast<double>(j) / total);
        Vector v(2);
        v << p.x(), p.y();
        return v;
    };
    TransferSpec spec;
    spec.X0 = [sample, curve0](const Vector& beta) { return sample(curve0, beta); };
    spec.XF = [sample, curveF](const Vector& beta) { return sample(curveF, beta); };
    return spec;
}

namespace {

PlanarCurve polar_curve(std::function<double(double)> rho) {
    return [rho](double s) {
        const double theta = 2.0 * std::numbers::pi * s;
        const double r = rho(theta);
        return Eigen::Vector2d(r * std::cos(theta), r * std::sin(theta));
    };
}

}  // namespace

PlanarCurve star_curve() {
    return polar_curve([](double th) {
        return 0.65 + 0.30 * std::cos(5.0 * th) + 0.05 * std::cos(10.0 * th);
    });
}

PlanarCurve leaf_curve() {
    return polar_curve([](double th) {
        return 0.55 * (1.0 + 0.85 * std::cos(th)) + 0.08 * std::cos(6.0 * th);
    });
}

PlanarCurve circle_curve() {
    return polar_curve([](double) { return 1.0; });
}

PlanarCurve builtin_curve(const std::string& name) {
    if (name == "star") return star_curve();
    if (name == "leaf") return leaf_curve();
    if (name == "circle") return circle_curve();
    throw ConfigError("unknown builtin curve: " + name);
}

}  // namespace ensctl
