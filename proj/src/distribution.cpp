#include "cct/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cct {

DiscreteDistribution DiscreteDistribution::from_pairs(
    std::vector<std::pair<std::uint64_t, double>> pairs) {
    std::map<std::uint64_t, double> acc;
    for (auto& [i, w] : pairs) {
        if (w < 0.0) throw std::invalid_argument("negative weight");
        if (w > 0.0) acc[i] += w;
    }
    DiscreteDistribution d;
    d.idx_.reserve(acc.size());
    d.w_.reserve(acc.size());
    for (auto& [i, w] : acc) {
        d.idx_.push_back(i);
        d.w_.push_back(w);
    }
    d.finalize();
    return d;
}

DiscreteDistribution DiscreteDistribution::from_weights(const std::vector<double>& w) {
    DiscreteDistribution d;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 0.0) throw std::invalid_argument("negative weight");
        if (w[i] > 0.0) {
            d.idx_.push_back(i);
            d.w_.push_back(w[i]);
        }
    }
    d.finalize();
    return d;
}

DiscreteDistribution DiscreteDistribution::uniform(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("empty support");
    DiscreteDistribution d;
    d.idx_.resize(n);
    d.w_.assign(n, 1.0 / double(n));
    for (std::uint64_t i = 0; i < n; ++i) d.idx_[i] = i;
    d.finalize();
    return d;
}

DiscreteDistribution DiscreteDistribution::point_mass(std::uint64_t idx) {
    DiscreteDistribution d;
    d.idx_ = {idx};
    d.w_ = {1.0};
    d.finalize();
    return d;
}

void DiscreteDistribution::finalize() {
    if (idx_.empty()) throw std::invalid_argument("empty support");
    double total = 0.0;
    for (double w : w_) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("zero total mass");
    for (double& w : w_) w /= total;

    // Vose's alias method.
    const std::size_t n = idx_.size();
    accept_.assign(n, 1.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = w_[i] * double(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(std::uint32_t(i));
    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back();
        small.pop_back();
        std::uint32_t l = large.back();
        large.pop_back();
        accept_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers are within rounding of 1; they accept themselves.
    for (std::uint32_t i : small) accept_[i] = 1.0;
    for (std::uint32_t i : large) accept_[i] = 1.0;
}

double DiscreteDistribution::mass(std::uint64_t idx) const {
    auto it = std::lower_bound(idx_.begin(), idx_.end(), idx);
    if (it == idx_.end() || *it != idx) return 0.0;
    return w_[std::size_t(it - idx_.begin())];
}

std::uint64_t DiscreteDistribution::sample(Rng& rng) const {
    const std::size_t i = std::size_t(rng.uniform_u64(idx_.size()));
    const double u = rng.uniform();
    return idx_[u < accept_[i] ? i : alias_[i]];
}

std::pair<DiscreteDistribution, double> DiscreteDistribution::restrict_to(
    const std::function<bool(std::uint64_t)>& keep) const {
    DiscreteDistribution d;
    double kept = 0.0;
    for (std::size_t i = 0; i < idx_.size(); ++i) {
        if (keep(idx_[i])) {
            d.idx_.push_back(idx_[i]);
            d.w_.push_back(w_[i]);
            kept += w_[i];
        }
    }
    if (d.idx_.empty()) return {DiscreteDistribution{}, 0.0};
    d.finalize();
    return {std::move(d), kept};
}

DiscreteDistribution DiscreteDistribution::map_through(
    const std::function<std::uint64_t(std::uint64_t)>& f) const {
    std::vector<std::pair<std::uint64_t, double>> pairs;
    pairs.reserve(idx_.size());
    for (std::size_t i = 0; i < idx_.size(); ++i) pairs.emplace_back(f(idx_[i]), w_[i]);
    return from_pairs(std::move(pairs));
}

double tv_distance(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.idx_.size() || j < b.idx_.size()) {
        if (j >= b.idx_.size() || (i < a.idx_.size() && a.idx_[i] < b.idx_[j])) {
            sum += a.w_[i++];
        } else if (i >= a.idx_.size() || b.idx_[j] < a.idx_[i]) {
            sum += b.w_[j++];
        } else {
            sum += std::fabs(a.w_[i++] - b.w_[j++]);
        }
    }
    return 0.5 * sum;
}

void DiscreteDistribution::save_csv(std::ostream& os) const {
    os << "index,prob\n";
    std::ostringstream row;
    row.imbue(std::locale::classic());
    row.precision(17);
    for (std::size_t i = 0; i < idx_.size(); ++i) {
        row.str("");
        row << idx_[i] << "," << w_[i] << "\n";
        os << row.str();
    }
}

void DiscreteDistribution::save_binary(std::ostream& os) const {
    os.write("CCTD1", 5);
    std::uint64_t n = idx_.size();
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (std::size_t i = 0; i < idx_.size(); ++i) {
        os.write(reinterpret_cast<const char*>(&idx_[i]), sizeof idx_[i]);
        os.write(reinterpret_cast<const char*>(&w_[i]), sizeof w_[i]);
    }
}

DiscreteDistribution DiscreteDistribution::load_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty distribution file");
    std::vector<std::pair<std::uint64_t, double>> pairs;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed distribution row");
        pairs.emplace_back(std::stoull(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return from_pairs(std::move(pairs));
}

DiscreteDistribution DiscreteDistribution::load_binary(std::istream& is) {
    char magic[5];
    is.read(magic, 5);
    if (!is || std::string(magic, 5) != "CCTD1")
        throw std::runtime_error("bad distribution file magic");
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    std::vector<std::pair<std::uint64_t, double>> pairs(n);
    for (auto& [i, w] : pairs) {
        is.read(reinterpret_cast<char*>(&i), sizeof i);
        is.read(reinterpret_cast<char*>(&w), sizeof w);
    }
    if (!is) throw std::runtime_error("truncated distribution file");
    return from_pairs(std::move(pairs));
}

void DiscreteDistribution::save_file(const std::string& path) const {
    const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
    std::ofstream os(path, csv ? std::ios::out : std::ios::out | std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    csv ? save_csv(os) : save_binary(os);
}

DiscreteDistribution DiscreteDistribution::load_file(const std::string& path) {
    const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
    std::ifstream is(path, csv ? std::ios::in : std::ios::in | std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return csv ? load_csv(is) : load_binary(is);
}

}  // namespace cct
