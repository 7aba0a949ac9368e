// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>

namespace bottomup {

/// Axis-aligned box in pixel coordinates.
struct Box {
    double x_min = 0;
    double y_min = 0;
    double x_max = 0;
    double y_max = 0;

    bool valid() const { return x_min < x_max && y_min < y_max; }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return valid() ? width() * height() : 0.0; }

    auto operator<=>(const Box&) const = default;
};

/// Smallest box covering both inputs.
inline Box union_region(const Box& a, const Box& b) {
    return {a.x_min < b.x_min ? a.x_min : b.x_min, a.y_min < b.y_min ? a.y_min : b.y_min,
            a.x_max > b.x_max ? a.x_max : b.x_max, a.y_max > b.y_max ? a.y_max : b.y_max};
}

/// Intersection over union; 0 for disjoint or degenerate boxes.
inline double iou(const Box& a, const Box& b) {
    const Box inter{a.x_min > b.x_min ? a.x_min : b.x_min, a.y_min > b.y_min ? a.y_min : b.y_min,
                    a.x_max < b.x_max ? a.x_max : b.x_max, a.y_max < b.y_max ? a.y_max : b.y_max};
    const double overlap = inter.area();
    const double total = a.area() + b.area() - overlap;
    return total > 0 ? overlap / total : 0.0;
}

}  // namespace bottomup
