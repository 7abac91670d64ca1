#include "zrpm/config_space.hpp"

#include <numeric>
#include <string>

#include "zrpm/error.hpp"

namespace zrpm {

namespace {
constexpr std::uint64_t kRankLimit = 1ULL << 62;
}

ConfigSpace::ConfigSpace(long n, int kappa) : ConfigSpace(n, kappa, {}) {}

ConfigSpace::ConfigSpace(long n, int kappa_total, std::vector<int> sites)
    : n_(n), kappa_total_(kappa_total), sites_(std::move(sites)) {
    if (sites_.empty()) {
        sites_.resize(kappa_total);
        std::iota(sites_.begin(), sites_.end(), 0);
    }
    k_ = static_cast<int>(sites_.size());
    if (n < 0 || k_ < 1) throw Error(ErrorKind::DegenerateModel, "invalid configuration space");
    const long rows = n_ + k_;
    binom_.assign(static_cast<std::size_t>(rows) * k_, 0);
    for (long a = 0; a < rows; ++a) {
        binom_[a * k_] = 1;
        for (int j = 1; j < k_ && j <= a; ++j) {
            unsigned __int128 v = static_cast<unsigned __int128>(binom_[(a - 1) * k_ + j - 1]) +
                                  (j < a ? binom_[(a - 1) * k_ + j] : 0);
            binom_[a * k_ + j] = v > kRankLimit ? kRankLimit + 1 : static_cast<std::uint64_t>(v);
        }
    }
    std::uint64_t s = binom(n_ + k_ - 1, k_ - 1);
    if (s > kRankLimit)
        throw Error(ErrorKind::Overflow, "configuration count exceeds 2^62 for N=" + std::to_string(n));
    size_ = s;
}

std::uint64_t ConfigSpace::binom(long n, int j) const {
    if (j < 0 || n < j || n < 0) return 0;
    if (j == 0) return 1;
    return binom_[static_cast<std::size_t>(n) * k_ + j];
}

std::uint64_t ConfigSpace::rank(const int* eta) const {
    std::uint64_t r = 0;
    long p = -1;
    for (int i = 0; i < k_ - 1; ++i) {
        p += eta[k_ - 1 - i] + 1;
        r += binom(p, i + 1);
    }
    return r;
}

void ConfigSpace::unrank(std::uint64_t r, int* eta) const {
    long hi = n_ + k_ - 2;
    long prev_top = n_ + k_ - 1;
    long used = 0;
    std::vector<long> p(k_ > 1 ? k_ - 1 : 0);
    for (int i = k_ - 2; i >= 0; --i) {
        long lo = i;
        long top = std::min(hi, prev_top - 1);
        while (lo < top) {
            long mid = (lo + top + 1) / 2;
            if (binom(mid, i + 1) <= r)
                lo = mid;
            else
                top = mid - 1;
        }
        p[i] = lo;
        r -= binom(lo, i + 1);
        prev_top = lo;
    }
    long last = -1;
    for (int i = 0; i < k_ - 1; ++i) {
        eta[k_ - 1 - i] = static_cast<int>(p[i] - last - 1);
        used += eta[k_ - 1 - i];
        last = p[i];
    }
    eta[0] = static_cast<int>(n_ - used);
}

Config ConfigSpace::unrank(std::uint64_t r) const {
    Config eta(k_);
    unrank(r, eta.data());
    return eta;
}

Config ConfigSpace::embed(const Config& local) const {
    Config full(kappa_total_, 0);
    for (int i = 0; i < k_; ++i) full[sites_[i]] = local[i];
    return full;
}

void ConfigSpace::materialize(std::uint64_t max_states) {
    if (!table_.empty()) return;
    if (size_ > max_states)
        throw Error(ErrorKind::Overflow, "configuration space too large to enumerate");
    table_.resize(size_ * k_);
    for (std::uint64_t r = 0; r < size_; ++r) unrank(r, table_.data() + r * k_);
}

}  // namespace zrpm
