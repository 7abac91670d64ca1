#pragma once

#include <cstdint>
#include <vector>

namespace zrpm {

using Config = std::vector<int>;

// Weak compositions of n over the given sites, ranked in colex order of the
// reversed stars-and-bars combination, so rank 0 is (n,0,...,0).
class ConfigSpace {
public:
    ConfigSpace(long n, int kappa);
    ConfigSpace(long n, int kappa_total, std::vector<int> sites);

    long particles() const { return n_; }
    int parts() const { return k_; }
    int kappa_total() const { return kappa_total_; }
    const std::vector<int>& sites() const { return sites_; }
    std::uint64_t size() const { return size_; }

    // eta has length parts()
    std::uint64_t rank(const int* eta) const;
    std::uint64_t rank(const Config& eta) const { return rank(eta.data()); }
    void unrank(std::uint64_t r, int* eta) const;
    Config unrank(std::uint64_t r) const;

    // Same composition written over all kappa_total sites.
    Config embed(const Config& local) const;

    // Dense occupation table, parts() ints per configuration.
    void materialize(std::uint64_t max_states = 50'000'000);
    bool materialized() const { return !table_.empty() || size_ == 0; }
    const int* at(std::uint64_t r) const { return table_.data() + r * k_; }

    std::uint64_t binom(long n, int j) const;

private:
    long n_;
    int k_;
    int kappa_total_;
    std::vector<int> sites_;
    std::uint64_t size_ = 0;
    std::vector<std::uint64_t> binom_;  // (n_ + k_) rows, k_ columns
    std::vector<int> table_;
};

}  // namespace zrpm
