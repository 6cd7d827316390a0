#pragma once

#include "cogspeech/common.hpp"

#include <doctest.h>

#include <string>

inline cogspeech::MaybeValue value_of(const cogspeech::FeatureBlock& b, const std::string& name) {
    for (const auto& nv : b)
        if (nv.name == name) return nv.value;
    FAIL("feature not found: " << name);
    return std::nullopt;
}
