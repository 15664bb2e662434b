#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace veribond {

/// Three-point quality rating given to a juror's written assessment.
enum class Rating : int { No = 0, Neutral = 1, Yes = 2 };

inline const char* rating_name(Rating r) {
    switch (r) {
        case Rating::No: return "no";
        case Rating::Neutral: return "neutral";
        case Rating::Yes: return "yes";
    }
    return "unknown";
}

inline Rating parse_rating(const std::string& s) {
    if (s == "no") return Rating::No;
    if (s == "neutral") return Rating::Neutral;
    if (s == "yes") return Rating::Yes;
    throw std::invalid_argument("parse_rating: unknown rating '" + s + "'");
}

}  // namespace veribond
