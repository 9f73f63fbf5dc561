#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ovmm {

/// Integer grid coordinate. x grows to the right, y grows downward in renders.
struct Cell {
    int x = 0;
    int y = 0;

    friend constexpr bool operator==(Cell, Cell) = default;
    friend constexpr auto operator<=>(Cell, Cell) = default;
    constexpr Cell operator+(Cell o) const { return {x + o.x, y + o.y}; }
    constexpr Cell operator-(Cell o) const { return {x - o.x, y - o.y}; }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kCellMeters = 0.25;

// Direction d points at angle 45*d degrees, measured from +x toward +y.
inline constexpr std::array<Cell, 8> kDirs = {
    Cell{1, 0}, Cell{1, 1}, Cell{0, 1}, Cell{-1, 1},
    Cell{-1, 0}, Cell{-1, -1}, Cell{0, -1}, Cell{1, -1}};
inline constexpr std::array<Cell, 4> kDirs4 = {Cell{1, 0}, Cell{0, 1}, Cell{-1, 0}, Cell{0, -1}};

inline double step_cost(int dir) { return (dir % 2 == 0) ? 1.0 : kSqrt2; }

inline double euclid(Cell a, Cell b) { return std::hypot(double(a.x - b.x), double(a.y - b.y)); }

inline int chebyshev(Cell a, Cell b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

/// Shortest 8-connected path length on an empty grid.
inline double octile(Cell a, Cell b) {
    const int dx = std::abs(a.x - b.x);
    const int dy = std::abs(a.y - b.y);
    const int lo = std::min(dx, dy);
    const int hi = std::max(dx, dy);
    return (hi - lo) + kSqrt2 * lo;
}

/// Normalizes an angle in degrees to (-180, 180].
inline double wrap_degrees(double a) {
    a = std::fmod(a, 360.0);
    if (a <= -180.0) a += 360.0;
    if (a > 180.0) a -= 360.0;
    return a;
}

/// Nearest of the 8 grid directions to an angle in degrees; ties go counterclockwise.
inline int nearest_dir(double degrees) {
    double a = std::fmod(degrees, 360.0);
    if (a < 0) a += 360.0;
    return static_cast<int>(std::floor(a / 45.0 + 0.5)) % 8;
}

/// Direction from a to b (a != b), quantized to 8 sectors.
inline int sector_of(Cell from, Cell to) {
    return nearest_dir(std::atan2(double(to.y - from.y), double(to.x - from.x)) * 180.0 / M_PI);
}

template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
        if (width < 0 || height < 0) throw std::invalid_argument("negative grid size");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
    Cell cell_at(std::size_t i) const { return {static_cast<int>(i % width_), static_cast<int>(i / width_)}; }

    T& operator[](Cell c) { return data_[index(c)]; }
    const T& operator[](Cell c) const { return data_[index(c)]; }
    T& at(Cell c) {
        if (!in_bounds(c)) throw std::out_of_range("cell outside grid");
        return data_[index(c)];
    }
    const T& at(Cell c) const {
        if (!in_bounds(c)) throw std::out_of_range("cell outside grid");
        return data_[index(c)];
    }

    void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }
    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Calls fn(cell) for every cell of the integer supercover line strictly between a and b.
/// Lines passing exactly through a cell corner step diagonally and touch neither side cell.
/// Iteration stops early when fn returns false; the return value reports whether it ran to completion.
template <typename Fn>
bool for_each_cell_between(Cell a, Cell b, Fn&& fn) {
    const int dx = b.x - a.x;
    const int dy = b.y - a.y;
    const int nx = std::abs(dx);
    const int ny = std::abs(dy);
    const int sx = dx > 0 ? 1 : -1;
    const int sy = dy > 0 ? 1 : -1;
    Cell p = a;
    int ix = 0;
    int iy = 0;
    while (ix < nx || iy < ny) {
        const long long decision = static_cast<long long>(1 + 2 * ix) * ny - static_cast<long long>(1 + 2 * iy) * nx;
        if (decision == 0) {
            p.x += sx;
            p.y += sy;
            ++ix;
            ++iy;
        } else if (decision < 0) {
            p.x += sx;
            ++ix;
        } else {
            p.y += sy;
            ++iy;
        }
        if (p == b) break;
        if (!fn(p)) return false;
    }
    return true;
}

}  // namespace ovmm
