#include "jkoflow/measure1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace jkoflow {

namespace {

constexpr double kMassTol = 1e-10;

void format_value(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf << '\n';
}

} // namespace

GridDensity::GridDensity(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (grid_.cells == 0 || values_.size() != grid_.cells)
        throw InvariantError("GridDensity: value count does not match grid");
    if (!(grid_.dx > 0.0) || !std::isfinite(grid_.dx) || !std::isfinite(grid_.x_min))
        throw InvariantError("GridDensity: invalid grid geometry");
    cumulative_.resize(grid_.cells + 1);
    cumulative_[0] = 0.0;
    double second_moment = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvariantError("GridDensity: negative or non-finite cell value");
        cumulative_[i + 1] = cumulative_[i] + grid_.dx * v;
        second_moment += square(grid_.center(i)) * v;
    }
    if (std::abs(cumulative_.back() - 1.0) > kMassTol)
        throw InvariantError("GridDensity: mass " + std::to_string(cumulative_.back()) +
                             " deviates from 1 beyond 1e-10");
    if (!std::isfinite(second_moment * grid_.dx))
        throw InvariantError("GridDensity: second moment not finite");
}

double GridDensity::mass() const { return cumulative_.back(); }

double GridDensity::sup() const {
    return *std::max_element(values_.begin(), values_.end());
}

double GridDensity::cdf(double x) const {
    if (x <= grid_.x_min) return 0.0;
    if (x >= grid_.x_max()) return 1.0;
    const double s = (x - grid_.x_min) / grid_.dx;
    auto i = static_cast<std::size_t>(s);
    if (i >= grid_.cells) i = grid_.cells - 1;
    const double frac = x - grid_.edge(i);
    return std::min(1.0, cumulative_[i] + values_[i] * frac);
}

Quantile::Quantile(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty())
        throw InvariantError("Quantile: empty value array");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw InvariantError("Quantile: non-finite value");
        if (i > 0 && values_[i] < values_[i - 1])
            throw InvariantError("Quantile: values must be nondecreasing");
    }
}

Quantile to_quantile(const GridDensity& d, std::size_t n) {
    if (n < 2)
        throw InvariantError("to_quantile: need n >= 2");
    if (!(d.mass() > 0.0))
        throw InvariantError("to_quantile: degenerate zero-mass input");
    std::vector<double> g(n);
    // cumulative_ is nondecreasing; invert exactly per cell. For omega on a
    // flat stretch the last edge with cdf <= omega is taken (sup-convention).
    std::size_t cell = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double omega = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        while (cell + 1 < d.cells() && d.cdf_at_edge(cell + 1) <= omega) ++cell;
        const double c0 = d.cdf_at_edge(cell);
        const double v = d.value(cell);
        double x = d.grid().edge(cell);
        if (v > 0.0) x += (omega - c0) / v;
        g[i] = std::min(x, d.grid().x_max());
    }
    return Quantile(std::move(g));
}

GridDensity to_density(const Quantile& q, const GridSpec& grid, ConversionReport* report) {
    const std::size_t n = q.size();
    if (n < 2)
        throw InvariantError("to_density: need at least two quantile values");
    if (grid.cells == 0 || !(grid.dx > 0.0))
        throw InvariantError("to_density: invalid target grid");

    // Piecewise-linear interpolant through (omega_i, G_i), extended with the
    // one-sided slopes over the half-cells at omega = 0 and omega = 1.
    std::vector<double> w(n + 2), x(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        w[i + 1] = q.omega(i);
        x[i + 1] = q.value(i);
    }
    const double d_first = q.value(1) - q.value(0);
    const double d_last = q.value(n - 1) - q.value(n - 2);
    w[0] = 0.0;
    x[0] = q.value(0) - 0.5 * d_first;
    w[n + 1] = 1.0;
    x[n + 1] = q.value(n - 1) + 0.5 * d_last;

    bool atoms = false;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (q.value(i + 1) - q.value(i) <= 0.0) atoms = true;

    // Mass of each grid cell = omega-measure of its preimage under G.
    auto omega_of = [&](double e) -> double {
        if (e <= x.front()) return 0.0;
        if (e >= x.back()) return 1.0;
        auto it = std::upper_bound(x.begin(), x.end(), e);
        const std::size_t s = static_cast<std::size_t>(it - x.begin()) - 1;
        const double dxseg = x[s + 1] - x[s];
        if (dxseg <= 0.0) return w[s];
        const double t = (e - x[s]) / dxseg;
        return w[s] + t * (w[s + 1] - w[s]);
    };

    std::vector<double> values(grid.cells, 0.0);
    double prev = omega_of(grid.edge(0));
    const double below = prev; // mass left of the window -> first cell
    double total = 0.0;
    for (std::size_t k = 0; k < grid.cells; ++k) {
        const double next = omega_of(grid.edge(k + 1));
        double cellmass = std::max(0.0, next - prev);
        if (k == 0) cellmass += below;
        if (k + 1 == grid.cells) cellmass += std::max(0.0, 1.0 - next);
        values[k] = cellmass;
        total += cellmass;
        prev = next;
    }
    double boundary = values.front() + (grid.cells > 1 ? values.back() : 0.0);
    for (auto& v : values) v /= total * grid.dx;

    if (report) {
        report->atoms = atoms;
        report->boundary_mass = boundary / total;
        report->window_overflow = report->boundary_mass > 1e-8;
    }
    return GridDensity(grid, std::move(values));
}

double wasserstein2(const Quantile& a, const Quantile& b) {
    if (a.size() != b.size())
        throw InvariantError("wasserstein2: quantile resolutions differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += square(a.value(i) - b.value(i));
    return std::sqrt(sum / static_cast<double>(a.size()));
}

Quantile shift(const Quantile& q, double c) {
    std::vector<double> v(q.values().begin(), q.values().end());
    for (auto& g : v) g += c;
    return Quantile(std::move(v));
}

void write_csv(const GridDensity& d, std::ostream& os) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# density,%zu,%.17g,%.17g\n", d.cells(), d.x_min(), d.dx());
    os << buf;
    for (double v : d.values()) format_value(os, v);
}

void write_csv(const Quantile& q, std::ostream& os) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# quantile,%zu,%.17g,%.17g\n", q.size(), 0.0,
                  1.0 / static_cast<double>(q.size()));
    os << buf;
    for (double v : q.values()) format_value(os, v);
}

namespace {

struct CsvHeader {
    std::string kind;
    std::size_t n = 0;
    double x_min = 0.0, dx = 0.0;
};

CsvHeader parse_header(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.size() < 2 || line[0] != '#')
        throw Error("csv: missing header line");
    std::istringstream ss(line.substr(1));
    CsvHeader h;
    std::string field;
    std::getline(ss, field, ',');
    h.kind = field;
    while (!h.kind.empty() && h.kind.front() == ' ') h.kind.erase(h.kind.begin());
    std::getline(ss, field, ',');
    h.n = static_cast<std::size_t>(std::stoull(field));
    std::getline(ss, field, ',');
    h.x_min = std::stod(field);
    std::getline(ss, field, ',');
    h.dx = std::stod(field);
    return h;
}

std::vector<double> read_values(std::istream& is, std::size_t n) {
    std::vector<double> v;
    v.reserve(n);
    std::string line;
    while (v.size() < n && std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        v.push_back(std::stod(line));
    }
    if (v.size() != n) throw Error("csv: expected " + std::to_string(n) + " values");
    return v;
}

} // namespace

GridDensity read_density_csv(std::istream& is) {
    const CsvHeader h = parse_header(is);
    if (h.kind != "density") throw Error("csv: expected kind 'density', got '" + h.kind + "'");
    return GridDensity(GridSpec{h.x_min, h.dx, h.n}, read_values(is, h.n));
}

Quantile read_quantile_csv(std::istream& is) {
    const CsvHeader h = parse_header(is);
    if (h.kind != "quantile") throw Error("csv: expected kind 'quantile', got '" + h.kind + "'");
    return Quantile(read_values(is, h.n));
}

} // namespace jkoflow
