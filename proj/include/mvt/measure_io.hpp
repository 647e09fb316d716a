#pragma once

#include <filesystem>
#include <iosfwd>

#include "mvt/measure.hpp"

namespace mvt {

/// CSV layout: header `x1,...,xd,weight`, one atom per row.
void write_measure_csv(std::ostream& out, const DiscreteSignedMeasure& mu);
void write_measure_csv(const std::filesystem::path& path, const DiscreteSignedMeasure& mu);

/// The dimension is taken from the header. Throws ConfigError with the
/// offending line number on malformed input.
DiscreteSignedMeasure read_measure_csv(std::istream& in, DomainKind kind);
DiscreteSignedMeasure read_measure_csv(const std::filesystem::path& path, DomainKind kind);

}  // namespace mvt
