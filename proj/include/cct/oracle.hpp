#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cct/clustering.hpp"
#include "cct/distribution.hpp"
#include "cct/domain.hpp"
#include "cct/rng.hpp"

namespace cct {

// Sampling-only view of a distribution over domain points. Lets the oracle
// serve both sparse explicit distributions and procedural ones (uniform over
// a huge lattice) through one interface.
class PointSource {
public:
    virtual ~PointSource() = default;
    virtual std::uint64_t sample(Rng& rng) const = 0;
};

class SparseSource : public PointSource {
public:
    explicit SparseSource(const DiscreteDistribution& d) : d_(&d) {}
    std::uint64_t sample(Rng& rng) const override { return d_->sample(rng); }

private:
    const DiscreteDistribution* d_;
};

class UniformBoxSource : public PointSource {
public:
    UniformBoxSource(const Space& s, const Box& b) : s_(&s), b_(b) {}
    std::uint64_t sample(Rng& rng) const override {
        return s_->encode(b_.sample(rng, s_->dim()));
    }

private:
    const Space* s_;
    Box b_;
};

// The confused-collector access model: SAMP draws x from an input
// distribution and reports rep(gamma(x)); LABEL answers rep(gamma(x)) for a
// chosen x. Counters record every call. Testers interact with the hidden
// clustering only through this class.
class OracleSession {
public:
    OracleSession(const Space& s, const Clustering& g,
                  std::vector<const PointSource*> inputs, std::uint64_t seed)
        : space_(&s), g_(&g), inputs_(std::move(inputs)), rng_(seed),
          samp_counts_(inputs_.size(), 0) {}

    std::uint64_t samp(std::size_t which = 0) {
        if (which >= inputs_.size()) throw std::invalid_argument("bad distribution id");
        ++samp_counts_[which];
        return g_->collector_output(inputs_[which]->sample(rng_));
    }

    std::uint64_t label(std::uint64_t x) {
        if (x >= space_->size()) throw std::invalid_argument("point outside domain");
        ++label_count_;
        return g_->collector_output(x);
    }

    bool same_cell_as(std::uint64_t x, std::uint64_t rep) { return label(x) == rep; }

    const Space& space() const { return *space_; }
    Rng& rng() { return rng_; }  // tester-side randomness, same seed stream
    std::size_t num_inputs() const { return inputs_.size(); }

    std::uint64_t samp_count(std::size_t which = 0) const { return samp_counts_[which]; }
    std::uint64_t total_samp_count() const {
        std::uint64_t t = 0;
        for (auto c : samp_counts_) t += c;
        return t;
    }
    std::uint64_t label_count() const { return label_count_; }

private:
    const Space* space_;
    const Clustering* g_;
    std::vector<const PointSource*> inputs_;
    Rng rng_;
    std::vector<std::uint64_t> samp_counts_;
    std::uint64_t label_count_ = 0;
};

}  // namespace cct
