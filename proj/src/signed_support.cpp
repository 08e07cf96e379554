#include "certiscope/abstract_lasso.hpp"
#include "certiscope/errors.hpp"

#include <algorithm>
#include <cmath>

namespace certiscope {

SignedSupport::SignedSupport(std::vector<SignedEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  for (size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].sign != 1 && entries_[k].sign != -1)
      throw DomainError("signed support entries need sign +1 or -1");
    if (k > 0 && entries_[k].index == entries_[k - 1].index)
      throw DomainError("signed support has duplicate index " + std::to_string(entries_[k].index));
  }
}

SignedSupport SignedSupport::of(const Vec& a, double tol) {
  std::vector<SignedEntry> e;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::abs(a(i)) > tol) e.push_back({static_cast<int>(i), a(i) > 0 ? 1 : -1});
  return SignedSupport(std::move(e));
}

std::vector<int> SignedSupport::indices() const {
  std::vector<int> idx;
  idx.reserve(entries_.size());
  for (const auto& e : entries_) idx.push_back(e.index);
  return idx;
}

Vec SignedSupport::signs() const {
  Vec s(static_cast<Eigen::Index>(entries_.size()));
  for (size_t k = 0; k < entries_.size(); ++k) s(static_cast<Eigen::Index>(k)) = entries_[k].sign;
  return s;
}

bool SignedSupport::contains(int index) const { return sign_at(index) != 0; }

int SignedSupport::sign_at(int index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const SignedEntry& e, int i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->sign : 0;
}

bool SignedSupport::includes(const SignedSupport& other) const {
  return std::all_of(other.entries_.begin(), other.entries_.end(),
                     [&](const SignedEntry& e) { return sign_at(e.index) == e.sign; });
}

}  // namespace certiscope
