#include <densemark/image.hpp>

#include <algorithm>
#include <cmath>

namespace densemark {

float FaceImage::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return pixels[static_cast<size_t>(y) * width + x];
}

double FaceImage::bilinear(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    int x1 = std::min(x0 + 1, width - 1);
    int y1 = std::min(y0 + 1, height - 1);
    double fx = x - x0, fy = y - y0;
    double v00 = at(x0, y0), v10 = at(x1, y0);
    double v01 = at(x0, y1), v11 = at(x1, y1);
    return (v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) +
           (v01 * (1.0 - fx) + v11 * fx) * fy;
}

} // namespace densemark
