#pragma once

// Versioned JSON documents for fitted models. Doubles are written with
// round-trip precision, so a reloaded model predicts bit-identically.

#include "past/predictor.hpp"

#include <string>

namespace past {

inline constexpr int kModelFormatVersion = 1;

std::string predictor_to_json(const Predictor& p, int indent = -1);
/// Throws ConfigError on malformed documents or unknown versions.
Predictor predictor_from_json(const std::string& text);

}  // namespace past
