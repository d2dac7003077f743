#include "aoi/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "aoi/errors.hpp"

namespace aoi {

namespace {

constexpr long long kMaxAgents = 100'000'000;

}  // namespace

void Simulator::Fenwick::init(int n) {
  n_ = n;
  tree_.assign(static_cast<std::size_t>(n) + 1, 0);
  highbit_ = 1;
  while (highbit_ * 2 <= n) highbit_ *= 2;
  total_ = 0;
}

void Simulator::Fenwick::add(int i, int delta) {
  total_ += delta;
  for (int x = i + 1; x <= n_; x += x & -x) tree_[static_cast<std::size_t>(x)] += delta;
}

int Simulator::Fenwick::kth(int k) const {
  int pos = 0;
  for (int pw = highbit_; pw > 0; pw >>= 1) {
    if (pos + pw <= n_ && tree_[static_cast<std::size_t>(pos + pw)] <= k) {
      pos += pw;
      k -= tree_[static_cast<std::size_t>(pos)];
    }
  }
  return pos;
}

Simulator::Simulator(const SimConfig& cfg)
    : class_specs_(cfg.network.classes),
      select_rng_(derive_stream(cfg.seed, 1)),
      channel_rng_(derive_stream(cfg.seed, 2)),
      age_function_(cfg.age_function),
      age_function_rescaled_(cfg.age_function_rescaled) {
  const auto sizes = validate_network(cfg.network);
  num_agents_ = cfg.network.num_agents;
  if (num_agents_ > kMaxAgents)
    fail(Errc::OutOfRangeParameter, "num_agents exceeds " + std::to_string(kMaxAgents));

  threshold_policy_ = cfg.policy.kind == PolicySpec::Kind::ThresholdRandom;
  if (threshold_policy_) {
    if (cfg.policy.thresholds.size() != class_specs_.size())
      fail(Errc::ValidationError, "policy thresholds must list one value per class");
    for (long long t : cfg.policy.thresholds)
      if (t < 0) fail(Errc::OutOfRangeParameter, "policy threshold must be >= 0");
  } else {
    if (!(cfg.policy.index_exponent >= 1.0) || !std::isfinite(cfg.policy.index_exponent))
      fail(Errc::OutOfRangeParameter, "index_exponent must be finite and >= 1");
    weight_exponent_ = cfg.policy.index_exponent + 1.0;
  }
  reset_offset_ = cfg.reset_age_to_one ? 0 : 1;

  std::vector<long long> init_ages(static_cast<std::size_t>(num_agents_), 0);
  switch (cfg.initial_ages.kind) {
    case InitialAges::Kind::Zero:
      break;
    case InitialAges::Kind::Gaussian: {
      SplitMix64 init_rng(derive_stream(cfg.seed, 3));
      const double mean = static_cast<double>(num_agents_) / 2.0;
      const double sd = std::sqrt(static_cast<double>(num_agents_));
      for (auto& h : init_ages)
        h = std::llround(std::max(0.0, mean + sd * init_rng.next_gaussian()));
      break;
    }
    case InitialAges::Kind::Explicit: {
      if (cfg.initial_ages.ages.size() != static_cast<std::size_t>(num_agents_))
        fail(Errc::ValidationError, "explicit initial ages must list one value per agent");
      for (long long h : cfg.initial_ages.ages)
        if (h < 0) fail(Errc::OutOfRangeParameter, "initial age must be >= 0");
      init_ages = cfg.initial_ages.ages;
      break;
    }
  }

  classes_.resize(class_specs_.size());
  class_of_.resize(static_cast<std::size_t>(num_agents_));
  reset_slot_.resize(static_cast<std::size_t>(num_agents_));
  prefix_.push_back(0.0);

  long long offset = 0;
  for (std::size_t c = 0; c < class_specs_.size(); ++c) {
    auto& cs = classes_[c];
    cs.offset = offset;
    cs.size = static_cast<int>(sizes[c]);
    if (threshold_policy_) {
      cs.threshold = cfg.policy.thresholds[c];
      cs.eligible.init(cs.size);
    }

    std::vector<std::pair<long long, int>> resets;  // (reset slot, local id)
    resets.reserve(static_cast<std::size_t>(cs.size));
    for (int local = 0; local < cs.size; ++local) {
      const long long id = offset + local;
      const long long h0 = init_ages[static_cast<std::size_t>(id)];
      class_of_[static_cast<std::size_t>(id)] = static_cast<int>(c);
      reset_slot_[static_cast<std::size_t>(id)] = -h0;
      sum_reset_ -= h0;
      ensure_prefix(h0);
      agefn_closed_ -= prefix_[static_cast<std::size_t>(h0)];
      resets.emplace_back(-h0, local);
    }
    std::sort(resets.begin(), resets.end());
    auto& queue = threshold_policy_ ? cs.pending : cs.groups;
    for (const auto& [r, local] : resets) {
      if (!queue.empty() && queue.back().reset_slot == r) {
        queue.back().members.push_back(local);  // locals ascend within equal r
      } else {
        queue.push_back(Group{r, {local}});
      }
    }
    offset += cs.size;
  }
}

void Simulator::promote_eligible() {
  for (auto& cs : classes_) {
    const long long cutoff = slot_ - cs.threshold - 1;  // age > threshold
    while (!cs.pending.empty() && cs.pending.front().reset_slot <= cutoff) {
      for (int local : cs.pending.front().members) cs.eligible.add(local, +1);
      cs.pending.pop_front();
    }
  }
}

long long Simulator::policy_select() {
  if (threshold_policy_) {
    promote_eligible();
    long long total = 0;
    for (const auto& cs : classes_) total += cs.eligible.total();
    if (total == 0) return -1;
    long long u = static_cast<long long>(select_rng_.below(static_cast<std::uint64_t>(total)));
    for (const auto& cs : classes_) {
      if (u < cs.eligible.total())
        return cs.offset + cs.eligible.kth(static_cast<int>(u));
      u -= cs.eligible.total();
    }
    return -1;  // unreachable
  }

  double best = 0.0;
  std::vector<std::size_t> tied;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& cs = classes_[c];
    if (cs.groups.empty()) continue;
    const long long h = slot_ - cs.groups.front().reset_slot;
    if (h <= 0) continue;
    const double w =
        class_specs_[c].success_prob * std::pow(static_cast<double>(h), weight_exponent_);
    if (w > best) {
      best = w;
      tied.assign(1, c);
    } else if (w == best && best > 0.0) {
      tied.push_back(c);
    }
  }
  if (tied.empty()) return -1;
  long long total = 0;
  for (std::size_t c : tied)
    total += static_cast<long long>(classes_[c].groups.front().members.size());
  long long u = total > 1
                    ? static_cast<long long>(select_rng_.below(static_cast<std::uint64_t>(total)))
                    : 0;
  for (std::size_t c : tied) {
    const auto& members = classes_[c].groups.front().members;
    if (u < static_cast<long long>(members.size()))
      return classes_[c].offset + members[static_cast<std::size_t>(u)];
    u -= static_cast<long long>(members.size());
  }
  return -1;  // unreachable
}

void Simulator::apply_delivery(long long agent, std::size_t cls) {
  auto& cs = classes_[cls];
  const int local = static_cast<int>(agent - cs.offset);
  const long long h_pre = slot_ - reset_slot_[static_cast<std::size_t>(agent)];
  ensure_prefix(h_pre + 1);
  agefn_closed_ += prefix_[static_cast<std::size_t>(h_pre + 1)];

  if (threshold_policy_) {
    cs.eligible.add(local, -1);
  } else {
    auto& members = cs.groups.front().members;
    auto it = std::lower_bound(members.begin(), members.end(), local);
    assert(it != members.end() && *it == local);
    members.erase(it);
    if (members.empty()) cs.groups.pop_front();
  }

  const long long new_reset = slot_ + reset_offset_;
  auto& queue = threshold_policy_ ? cs.pending : cs.groups;
  if (!queue.empty() && queue.back().reset_slot == new_reset) {
    auto& back = queue.back().members;
    back.insert(std::lower_bound(back.begin(), back.end(), local), local);
  } else {
    queue.push_back(Group{new_reset, {local}});
  }

  sum_reset_ += new_reset - reset_slot_[static_cast<std::size_t>(agent)];
  reset_slot_[static_cast<std::size_t>(agent)] = new_reset;
}

void Simulator::step() {
  age_sum_ += static_cast<AgeSum>(num_agents_) * slot_ - static_cast<AgeSum>(sum_reset_);
  const long long agent = policy_select();
  if (agent >= 0) {
    const auto cls = static_cast<std::size_t>(class_of_[static_cast<std::size_t>(agent)]);
    if (channel_rng_.next_double() < class_specs_[cls].success_prob)
      apply_delivery(agent, cls);
  }
  ++slot_;
}

std::vector<long long> Simulator::ages() const {
  std::vector<long long> out(static_cast<std::size_t>(num_agents_));
  for (long long i = 0; i < num_agents_; ++i) out[static_cast<std::size_t>(i)] = age_of(i);
  return out;
}

double Simulator::avg_aoi() const {
  if (slot_ == 0) return 0.0;
  return static_cast<double>(static_cast<long double>(age_sum_) /
                             (static_cast<long double>(slot_) * num_agents_));
}

double Simulator::scaled_age_value(long long h) const {
  const double x = age_function_rescaled_
                       ? static_cast<double>(h) / static_cast<double>(num_agents_)
                       : static_cast<double>(h);
  return age_function_(x);
}

void Simulator::ensure_prefix(long long upto) const {
  while (static_cast<long long>(prefix_.size()) <= upto) {
    const long long j = static_cast<long long>(prefix_.size()) - 1;
    prefix_.push_back(prefix_.back() + scaled_age_value(j));
  }
}

double Simulator::agefn_sum() const {
  long long max_age = 0;
  for (long long i = 0; i < num_agents_; ++i) max_age = std::max(max_age, age_of(i));
  ensure_prefix(max_age);
  double open = 0.0;
  for (long long i = 0; i < num_agents_; ++i)
    open += prefix_[static_cast<std::size_t>(age_of(i))];
  return agefn_closed_ + open;
}

double Simulator::avg_agefn() const {
  if (slot_ == 0) return 0.0;
  return agefn_sum() / (static_cast<double>(slot_) * static_cast<double>(num_agents_));
}

OccupancySnapshot Simulator::snapshot() const {
  OccupancySnapshot snap;
  snap.slot = slot_;
  snap.num_agents = num_agents_;
  snap.rescaled_ages.resize(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    auto& out = snap.rescaled_ages[c];
    out.reserve(static_cast<std::size_t>(classes_[c].size));
    for (int local = 0; local < classes_[c].size; ++local)
      out.push_back(static_cast<double>(age_of(classes_[c].offset + local)));
    std::sort(out.begin(), out.end());
    for (auto& h : out) h /= static_cast<double>(num_agents_);
  }
  return snap;
}

double empirical_cdf(const OccupancySnapshot& snap, std::size_t cls, double hhat) {
  if (cls >= snap.rescaled_ages.size()) fail(Errc::ClassMismatch, "snapshot class out of range");
  const auto& v = snap.rescaled_ages[cls];
  const auto count = std::upper_bound(v.begin(), v.end(), hhat) - v.begin();
  return static_cast<double>(count) / static_cast<double>(snap.num_agents);
}

SimResult run(const SimConfig& cfg) {
  if (cfg.horizon < 1) fail(Errc::OutOfRangeParameter, "horizon must be >= 1");
  for (std::size_t i = 0; i < cfg.snapshot_slots.size(); ++i) {
    const long long s = cfg.snapshot_slots[i];
    if (s < 1 || s > cfg.horizon)
      fail(Errc::ValidationError, "snapshot slot outside [1, horizon]");
    if (i > 0 && s <= cfg.snapshot_slots[i - 1])
      fail(Errc::ValidationError, "snapshot slots must be strictly increasing");
  }

  Simulator sim(cfg);
  SimResult res;
  res.horizon = cfg.horizon;
  res.num_agents = sim.num_agents();
  res.snapshots.reserve(cfg.snapshot_slots.size());
  for (long long s : cfg.snapshot_slots) {
    while (sim.slot() < s) sim.step();
    res.snapshots.push_back(sim.snapshot());
  }
  while (sim.slot() < cfg.horizon) sim.step();

  res.age_sum = sim.age_sum();
  res.agefn_sum = sim.agefn_sum();
  res.avg_aoi = sim.avg_aoi();
  res.avg_agefn = sim.avg_agefn();
  return res;
}

}  // namespace aoi
