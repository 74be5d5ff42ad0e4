#include "wellrom/fields.hpp"

#include "wellrom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace wellrom {

namespace {

// Unit-variance Gaussian field: separable Gaussian smoothing of white noise,
// standardized by its sample moments.
std::vector<double> gaussian_field(const Grid2D& g, double lx, double ly, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const int nx = g.nx;
    const int ny = g.ny;
    std::vector<double> z(static_cast<std::size_t>(g.cells()));
    for (double& v : z)
        v = normal(rng);

    auto kernel = [](double len) {
        std::vector<double> k;
        if (len <= 0.0)
            return std::vector<double>{1.0};
        const int half = static_cast<int>(std::ceil(3.0 * len));
        for (int d = -half; d <= half; ++d)
            k.push_back(std::exp(-0.5 * d * d / (len * len)));
        return k;
    };
    const auto kx = kernel(lx);
    const auto ky = kernel(ly);
    const int hx = static_cast<int>(kx.size() / 2);
    const int hy = static_cast<int>(ky.size() / 2);

    std::vector<double> tmp(z.size(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double s = 0.0;
            for (int d = -hx; d <= hx; ++d) {
                const int ii = std::clamp(i + d, 0, nx - 1);
                s += kx[static_cast<std::size_t>(d + hx)] * z[static_cast<std::size_t>(g.index(ii, j))];
            }
            tmp[static_cast<std::size_t>(g.index(i, j))] = s;
        }
    std::vector<double> out(z.size(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double s = 0.0;
            for (int d = -hy; d <= hy; ++d) {
                const int jj = std::clamp(j + d, 0, ny - 1);
                s += ky[static_cast<std::size_t>(d + hy)] * tmp[static_cast<std::size_t>(g.index(i, jj))];
            }
            out[static_cast<std::size_t>(g.index(i, j))] = s;
        }

    double mean = 0.0;
    for (double v : out)
        mean += v;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (double v : out)
        var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(out.size()));
    for (double& v : out)
        v = sd > 0.0 ? (v - mean) / sd : 0.0;
    return out;
}

} // namespace

FieldGenerator parse_field_generator(const std::string& name)
{
    if (name == "homogeneous")
        return FieldGenerator::Homogeneous;
    if (name == "lognormal")
        return FieldGenerator::Lognormal;
    if (name == "channelized")
        return FieldGenerator::Channelized;
    throw ConfigError("unknown field generator '" + name
                      + "' (expected homogeneous, lognormal or channelized)");
}

RockProps generate_field(const Grid2D& grid, const SyntheticFieldSpec& spec)
{
    grid.validate();
    if (!(spec.porosity > 0.0 && spec.porosity < 1.0))
        throw ConfigError("porosity must lie in (0, 1)");
    const auto n = static_cast<std::size_t>(grid.cells());
    RockProps rock;
    std::mt19937_64 rng(spec.seed);

    switch (spec.generator) {
    case FieldGenerator::Homogeneous:
        if (!(spec.mean_perm > 0.0))
            throw ConfigError("permeability must be positive");
        rock.permeability.assign(n, spec.mean_perm);
        rock.porosity.assign(n, spec.porosity);
        return rock;

    case FieldGenerator::Lognormal: {
        if (!(spec.mean_perm > 0.0) || spec.log_std < 0.0)
            throw ConfigError("lognormal field needs median > 0 and log_std >= 0");
        const auto z = gaussian_field(grid, spec.corr_length_x, spec.corr_length_y, rng);
        rock.permeability.resize(n);
        rock.porosity.assign(n, spec.porosity);
        for (std::size_t c = 0; c < n; ++c)
            rock.permeability[c] = spec.mean_perm * std::exp(spec.log_std * z[c]);
        return rock;
    }

    case FieldGenerator::Channelized: {
        if (spec.channels < 1 || !(spec.channel_width > 0.0) || !(spec.channel_perm > 0.0)
            || !(spec.background_perm > 0.0)
            || !(spec.background_porosity > 0.0 && spec.background_porosity < 1.0))
            throw ConfigError("invalid channelized field parameters");
        const auto zb = gaussian_field(grid, 3.0, 3.0, rng);
        const auto zc = gaussian_field(grid, 1.5, 6.0, rng);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        std::vector<bool> sand(n, false);
        const double spacing = static_cast<double>(grid.nx) / spec.channels;
        for (int k = 0; k < spec.channels; ++k) {
            const double phase = 2.0 * std::numbers::pi * unit(rng);
            const double amp = spec.meander_amplitude * (0.6 + 0.8 * unit(rng));
            const double wave = spec.meander_wavelength * (0.7 + 0.6 * unit(rng));
            double x0 = spacing * (k + 0.5) + 0.5 * spacing * (unit(rng) - 0.5);
            if (k == 0 && spec.anchor_i >= 0)
                x0 = spec.anchor_i - amp * std::sin(phase);
            for (int j = 0; j < grid.ny; ++j) {
                const double xc = x0 + amp * std::sin(2.0 * std::numbers::pi * j / wave + phase);
                for (int i = 0; i < grid.nx; ++i)
                    if (std::abs(i - xc) <= 0.5 * spec.channel_width)
                        sand[static_cast<std::size_t>(grid.index(i, j))] = true;
            }
        }

        rock.permeability.resize(n);
        rock.porosity.resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            if (sand[c]) {
                rock.permeability[c] =
                    std::clamp(spec.channel_perm * std::exp(0.7 * zc[c]), 100.0, 5000.0);
                rock.porosity[c] = std::clamp(spec.porosity * (1.0 + 0.1 * zc[c]), 0.05, 0.4);
            } else {
                rock.permeability[c] =
                    std::clamp(spec.background_perm * std::exp(0.8 * zb[c]), 0.05, 9.5);
                rock.porosity[c] =
                    std::clamp(spec.background_porosity * (1.0 + 0.2 * zb[c]), 0.02, 0.3);
            }
        }
        return rock;
    }
    }
    throw ConfigError("unhandled field generator");
}

} // namespace wellrom
