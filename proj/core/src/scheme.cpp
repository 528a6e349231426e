#include <densemark/scheme.hpp>

#include <densemark/error.hpp>

#include <algorithm>

namespace densemark {

int ContourScheme::total_points() const {
    int n = 0;
    for (const auto& c : components) n += c.size();
    return n;
}

const ComponentSpec* ContourScheme::component_of(int index) const {
    for (const auto& c : components)
        if (c.contains(index)) return &c;
    return nullptr;
}

int ContourScheme::component_index_of(int index) const {
    for (size_t k = 0; k < components.size(); ++k)
        if (components[k].contains(index)) return static_cast<int>(k);
    return -1;
}

void ContourScheme::validate() const {
    if (components.empty())
        throw config_error("scheme '" + scheme_id + "' has no components");

    std::vector<ComponentSpec> sorted = components;
    std::sort(sorted.begin(), sorted.end(),
              [](const ComponentSpec& a, const ComponentSpec& b) { return a.first < b.first; });

    int expect = 0;
    for (const auto& c : sorted) {
        if (c.first > c.last)
            throw config_error("component '" + c.name + "': empty index range");
        if (c.first != expect)
            throw config_error("scheme '" + scheme_id + "': component ranges must be disjoint and cover 0.." +
                               std::to_string(total_points() - 1) + " (gap or overlap at index " +
                               std::to_string(c.first) + ")");
        expect = c.last + 1;

        if (c.isolated && c.size() != 1)
            throw config_error("component '" + c.name + "': isolated components hold exactly one anchor");
        if (c.closed && c.isolated)
            throw config_error("component '" + c.name + "': a closed component cannot be isolated");
        if (!c.isolated && c.size() < 2)
            throw config_error("component '" + c.name + "': needs at least 2 anchors");
        if (c.fit == FitKind::BSpline && !c.isolated) {
            if (c.degree < 1)
                throw config_error("component '" + c.name + "': spline degree must be positive");
            if (c.degree >= c.size())
                throw config_error("component '" + c.name + "': spline degree " + std::to_string(c.degree) +
                                   " requires more than " + std::to_string(c.size()) + " anchors");
        }
    }

    auto check_index = [&](int idx, const char* what) {
        if (idx >= 0 && idx >= total_points())
            throw config_error("scheme '" + scheme_id + "': " + what + " index out of range");
    };
    check_index(outer_eye_right, "outer eye corner");
    check_index(outer_eye_left, "outer eye corner");
    check_index(inner_eye_right, "inner eye corner");
    check_index(inner_eye_left, "inner eye corner");
}

} // namespace densemark
