#pragma once

#include "wellrom/model.hpp"

#include <cstdint>
#include <string>

namespace wellrom {

enum class FieldGenerator { Homogeneous, Lognormal, Channelized };

FieldGenerator parse_field_generator(const std::string& name);

/// Parameters for the synthetic permeability/porosity generators.
struct SyntheticFieldSpec {
    FieldGenerator generator = FieldGenerator::Homogeneous;
    double mean_perm = 100.0;  // mD; homogeneous value or lognormal median
    double log_std = 1.0;      // std of ln K (lognormal)
    double corr_length_x = 4.0; // cells
    double corr_length_y = 4.0; // cells
    double porosity = 0.2;     // constant porosity, or the channel-sand value

    // Channelized: sinuous north-south sand bodies in a tight background.
    int channels = 5;
    double channel_width = 4.0;       // cells
    double channel_perm = 600.0;      // median, mD
    double background_perm = 2.0;     // median, mD
    double background_porosity = 0.1;
    double meander_amplitude = 4.0;   // cells
    double meander_wavelength = 30.0; // cells
    int anchor_i = -1; // if >= 0, one channel passes through (anchor_i, 0)

    std::uint64_t seed = 1;
};

/// Generated permeability > 0 everywhere and porosity in (0, 1).
RockProps generate_field(const Grid2D& grid, const SyntheticFieldSpec& spec);

} // namespace wellrom
