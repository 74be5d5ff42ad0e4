#include "wellrom/pod.hpp"

#include "binary_io.hpp"
#include "wellrom/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace wellrom {

namespace {

constexpr char kBasisMagic[4] = {'W', 'R', 'P', 'B'};
constexpr std::uint32_t kBasisVersion = 1;

} // namespace

const char* to_string(StateField field) noexcept
{
    return field == StateField::Pressure ? "pressure" : "saturation";
}

SnapshotMatrix assemble_snapshots(const std::vector<const StateSeries*>& series, StateField field)
{
    if (series.empty())
        throw InputError("snapshot assembly needs at least one state series");
    const StateSeries& first = *series.front();
    const auto cells = static_cast<Eigen::Index>(first.nx) * first.ny;
    const auto nt = first.times.size();
    if (cells <= 0 || nt == 0)
        throw InputError("state series is empty");
    for (const StateSeries* s : series) {
        if (s->nx != first.nx || s->ny != first.ny)
            throw InputError("state series on different grids");
        if (s->times != first.times || s->states.size() != nt)
            throw InputError("state series on different report times");
    }

    SnapshotMatrix m;
    m.field = field;
    m.data.resize(cells, static_cast<Eigen::Index>(series.size() * nt));
    m.columns.reserve(series.size() * nt);
    Eigen::Index col = 0;
    for (std::size_t z = 0; z < series.size(); ++z)
        for (std::size_t t = 0; t < nt; ++t, ++col) {
            const State& st = series[z]->states[t];
            const auto& v = field == StateField::Pressure ? st.pressure : st.sw;
            if (static_cast<Eigen::Index>(v.size()) != cells)
                throw InputError("state vector length does not match the grid");
            m.data.col(col) = Eigen::Map<const Eigen::VectorXd>(v.data(), cells);
            m.columns.push_back({static_cast<int>(z), first.times[t]});
        }
    return m;
}

SnapshotMatrix assemble_snapshots(const std::vector<StateSeries>& series, StateField field)
{
    std::vector<const StateSeries*> ptrs;
    ptrs.reserve(series.size());
    for (const auto& s : series)
        ptrs.push_back(&s);
    return assemble_snapshots(ptrs, field);
}

// Gram eigenvalues carry absolute error ~eps * sigma_1^2, so singular values
// below ~sqrt(k eps) sigma_1 are indistinguishable from zero.
double sigma_floor(double sigma1, int gram_size)
{
    const double eps = std::numeric_limits<double>::epsilon();
    return std::max(1e-10, std::sqrt(std::max(1, gram_size) * eps)) * sigma1;
}

PodBasis compute_basis(const SnapshotMatrix& snapshots, double energy_fraction)
{
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw InputError("energy fraction must lie in (0, 1]");
    const Eigen::MatrixXd& x = snapshots.data;
    if (x.cols() == 0 || x.rows() == 0)
        throw InputError("snapshot matrix is empty");

    PodBasis b;
    b.field = snapshots.field;
    b.energy_fraction = energy_fraction;
    b.mean = x.rowwise().mean();
    const Eigen::MatrixXd a = x.colwise() - b.mean;

    const bool tall = a.rows() >= a.cols();
    const Eigen::MatrixXd gram = tall ? Eigen::MatrixXd(a.transpose() * a)
                                      : Eigen::MatrixXd(a * a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw InputError("Gram eigendecomposition failed");
    const Eigen::Index k = gram.rows();

    // Eigen sorts ascending; walk from the top.
    b.sigma.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        b.sigma[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, eig.eigenvalues()[k - 1 - i]));

    const double floor = b.sigma.front() > 0.0 ? sigma_floor(b.sigma.front(), static_cast<int>(k))
                                               : std::numeric_limits<double>::infinity();
    b.rank = static_cast<int>(std::count_if(b.sigma.begin(), b.sigma.end(),
                                            [&](double s) { return s > floor; }));
    if (b.rank == 0) {
        b.modes.resize(a.rows(), 0);
        b.energy = 0.0;
        b.warnings.push_back(std::string("all ") + to_string(b.field)
                             + " snapshots are identical; basis has no modes");
        return b;
    }

    int r = b.rank;
    for (int i = 1; i <= b.rank; ++i)
        if (energy_captured(b, i) >= energy_fraction - 1e-12) {
            r = i;
            break;
        }

    b.modes.resize(a.rows(), r);
    for (int i = 0; i < r; ++i) {
        const Eigen::VectorXd v = eig.eigenvectors().col(k - 1 - i);
        if (tall)
            b.modes.col(i) = a * v / b.sigma[static_cast<std::size_t>(i)];
        else
            b.modes.col(i) = v;
    }
    if (tall) {
        // Modified Gram-Schmidt pass: A v / sigma drifts from orthonormality
        // for the smaller retained sigma.
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < i; ++j)
                b.modes.col(i) -= b.modes.col(j).dot(b.modes.col(i)) * b.modes.col(j);
            b.modes.col(i).normalize();
        }
    }
    // Deterministic sign: largest-magnitude entry positive.
    for (int i = 0; i < r; ++i) {
        Eigen::Index at = 0;
        b.modes.col(i).cwiseAbs().maxCoeff(&at);
        if (b.modes(at, i) < 0.0)
            b.modes.col(i) *= -1.0;
    }
    b.energy = energy_captured(b, r);
    return b;
}

double energy_captured(const PodBasis& basis, int r)
{
    if (basis.rank == 0)
        return 0.0;
    if (r < 0 || r > basis.rank)
        throw InputError("energy requested beyond the numerical rank");
    double total = 0.0;
    double head = 0.0;
    for (int i = 0; i < basis.rank; ++i) {
        total += basis.sigma[static_cast<std::size_t>(i)];
        if (i < r)
            head += basis.sigma[static_cast<std::size_t>(i)];
    }
    return r == basis.rank ? 1.0 : head / total;
}

Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& state)
{
    if (state.size() != basis.mean.size())
        throw InputError("state length does not match the basis");
    return basis.modes.transpose() * (state - basis.mean);
}

Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& coefficients)
{
    if (coefficients.size() != basis.modes.cols())
        throw InputError("coefficient count does not match the basis");
    return basis.modes * coefficients + basis.mean;
}

ProjectionError orthogonal_projection_error(const PodBasis& basis, const Eigen::VectorXd& state)
{
    if (state.size() != basis.mean.size())
        throw InputError("state length does not match the basis");
    const Eigen::VectorXd d = state - basis.mean;
    ProjectionError e;
    e.field = d - basis.modes * (basis.modes.transpose() * d);
    e.norm = e.field.norm();
    return e;
}

void write_basis(const std::string& path, const PodBasis& basis)
{
    detail::BinaryWriter w(path, kBasisMagic, kBasisVersion);
    w.u32(basis.field == StateField::Pressure ? 0u : 1u);
    w.f64(basis.energy_fraction);
    w.f64(basis.energy);
    w.u64(static_cast<std::uint64_t>(basis.rank));
    w.vec(basis.sigma);
    w.u64(static_cast<std::uint64_t>(basis.mean.size()));
    w.f64s(basis.mean.data(), static_cast<std::size_t>(basis.mean.size()));
    w.u64(static_cast<std::uint64_t>(basis.modes.cols()));
    w.f64s(basis.modes.data(), static_cast<std::size_t>(basis.modes.size()));
    w.finish();
}

PodBasis read_basis(const std::string& path)
{
    detail::BinaryReader rd(path, kBasisMagic, kBasisVersion);
    PodBasis b;
    const auto field = rd.u32();
    if (field > 1)
        throw InputError("unknown state field in " + path);
    b.field = field == 0 ? StateField::Pressure : StateField::Saturation;
    b.energy_fraction = rd.f64();
    b.energy = rd.f64();
    b.rank = static_cast<int>(rd.u64());
    b.sigma = rd.vec();
    const auto n = rd.u64();
    if (n == 0 || n > (std::uint64_t{1} << 28) || static_cast<std::size_t>(b.rank) > b.sigma.size())
        throw InputError("corrupt basis header in " + path);
    b.mean.resize(static_cast<Eigen::Index>(n));
    rd.f64s(b.mean.data(), n);
    const auto r = rd.u64();
    if (r > static_cast<std::uint64_t>(b.rank))
        throw InputError("corrupt basis header in " + path);
    b.modes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
    rd.f64s(b.modes.data(), static_cast<std::size_t>(n * r));
    return b;
}

void write_sigma_csv(const std::string& path, const PodBasis& basis)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path);
    out << "index,sigma,energy\n";
    out.precision(12);
    double total = 0.0;
    for (int i = 0; i < basis.rank; ++i)
        total += basis.sigma[static_cast<std::size_t>(i)];
    double cum = 0.0;
    for (std::size_t i = 0; i < basis.sigma.size(); ++i) {
        if (static_cast<int>(i) < basis.rank)
            cum += basis.sigma[i];
        out << i + 1 << ',' << basis.sigma[i] << ',' << (total > 0.0 ? cum / total : 0.0) << '\n';
    }
}

} // namespace wellrom
