#include "botflow/flow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <tuple>

#include "botflow/error.hpp"

namespace botflow {

double RunningStats::stddev() const noexcept { return std::sqrt(variance()); }

void MeterConfig::validate() const {
    if (activity_timeout_us <= 0) throw ValidationError("activity timeout must be positive");
    if (flow_timeout_us <= activity_timeout_us) {
        throw ValidationError("flow timeout must exceed the activity timeout");
    }
}

FlowKey FlowKey::of(const PacketRecord& pkt) noexcept {
    FlowKey k;
    k.protocol = pkt.protocol;
    if (std::tie(pkt.src_ip, pkt.src_port) <= std::tie(pkt.dst_ip, pkt.dst_port)) {
        k.ip_a = pkt.src_ip;
        k.port_a = pkt.src_port;
        k.ip_b = pkt.dst_ip;
        k.port_b = pkt.dst_port;
    } else {
        k.ip_a = pkt.dst_ip;
        k.port_a = pkt.dst_port;
        k.ip_b = pkt.src_ip;
        k.port_b = pkt.src_port;
    }
    return k;
}

std::size_t FlowKeyHash::operator()(const FlowKey& k) const noexcept {
    IpAddressHash ih;
    std::size_t h = ih(k.ip_a);
    h = h * 31 + ih(k.ip_b);
    h = h * 31 + (std::size_t{k.port_a} << 16 | k.port_b);
    h = h * 31 + k.protocol;
    return h;
}

FlowAccumulator::FlowAccumulator(const PacketRecord& first, const MeterConfig& config,
                                 std::uint64_t sequence)
    : key_(FlowKey::of(first)),
      fwd_src_{first.src_ip, first.src_port},
      fwd_dst_{first.dst_ip, first.dst_port},
      sequence_(sequence),
      first_ts_us_(first.timestamp_us),
      last_ts_us_(first.timestamp_us),
      prev_arrival_us_(first.timestamp_us),
      active_start_us_(first.timestamp_us),
      active_end_us_(first.timestamp_us),
      activity_timeout_us_(config.activity_timeout_us) {
    add(first, config);
}

bool FlowAccumulator::is_forward(const PacketRecord& pkt) const noexcept {
    return pkt.src_ip == fwd_src_.ip && pkt.src_port == fwd_src_.port;
}

std::int64_t FlowAccumulator::flag_count(std::uint8_t bit) const noexcept {
    return flag_counts_[std::countr_zero(bit)];
}

void FlowAccumulator::update_activity(std::int64_t ts) {
    if (ts - active_end_us_ > activity_timeout_us_) {
        if (active_end_us_ - active_start_us_ > 0) {
            active_.add(static_cast<double>(active_end_us_ - active_start_us_));
        }
        idle_.add(static_cast<double>(ts - active_end_us_));
        active_start_us_ = active_end_us_ = ts;
    } else {
        active_end_us_ = std::max(active_end_us_, ts);
    }
}

void FlowAccumulator::add(const PacketRecord& pkt, const MeterConfig& /*config*/) {
    const std::int64_t ts = pkt.timestamp_us;
    const bool first_packet = length_.count() == 0;
    DirectionState& dir = is_forward(pkt) ? fwd_ : bwd_;

    // Inter-arrival times follow file order; a packet stamped earlier than its
    // predecessor contributes a zero gap.
    if (!first_packet) {
        iat_.add(static_cast<double>(std::max<std::int64_t>(0, ts - prev_arrival_us_)));
        update_activity(ts);
    }
    prev_arrival_us_ = ts;
    if (dir.length.count() > 0) {
        dir.iat.add(static_cast<double>(std::max<std::int64_t>(0, ts - dir.last_ts_us)));
    }
    dir.last_ts_us = ts;
    first_ts_us_ = std::min(first_ts_us_, ts);
    last_ts_us_ = std::max(last_ts_us_, ts);

    const auto payload = static_cast<double>(pkt.payload_len);
    length_.add(payload);
    dir.length.add(payload);
    dir.header_bytes += pkt.header_len;

    for (int b = 0; b < 8; ++b) {
        if (pkt.tcp_flags & (1u << b)) ++flag_counts_[b];
    }
    if (pkt.has_flag(tcp_flag::psh)) ++dir.psh;
    if (pkt.has_flag(tcp_flag::urg)) ++dir.urg;
    if (dir.init_window < 0 && pkt.tcp_window) dir.init_window = *pkt.tcp_window;

    if (pkt.protocol == ip_proto::tcp && !terminated_) {
        if (pkt.has_flag(tcp_flag::rst)) {
            terminated_ = true;
        } else if (fwd_.fin > 0 && bwd_.fin > 0 && pkt.has_flag(tcp_flag::ack)) {
            terminated_ = true;
        }
    }
    if (pkt.has_flag(tcp_flag::fin)) ++dir.fin;
}

void FlowAccumulator::close() {
    if (closed_) return;
    closed_ = true;
    if (active_end_us_ - active_start_us_ > 0) {
        active_.add(static_cast<double>(active_end_us_ - active_start_us_));
    }
}

FlowTable::FlowTable(MeterConfig config) : config_(std::move(config)) { config_.validate(); }

std::vector<FlowAccumulator> FlowTable::offer(const PacketRecord& pkt) {
    std::vector<FlowAccumulator> done;
    const FlowKey key = FlowKey::of(pkt);
    auto it = live_.find(key);
    if (it != live_.end() && pkt.timestamp_us - it->second.last_ts_us() >= config_.flow_timeout_us) {
        done.push_back(std::move(it->second));
        done.back().close();
        live_.erase(it);
        it = live_.end();
    }
    if (it == live_.end()) {
        FlowAccumulator flow(pkt, config_, next_sequence_++);
        if (flow.terminated()) {
            flow.close();
            done.push_back(std::move(flow));
        } else {
            live_.emplace(key, std::move(flow));
        }
        return done;
    }
    it->second.add(pkt, config_);
    if (it->second.terminated()) {
        done.push_back(std::move(it->second));
        done.back().close();
        live_.erase(it);
    }
    return done;
}

namespace {

std::vector<FlowAccumulator> take_sorted(
    std::unordered_map<FlowKey, FlowAccumulator, FlowKeyHash>& live,
    auto&& predicate) {
    std::vector<FlowAccumulator> out;
    for (auto it = live.begin(); it != live.end();) {
        if (predicate(it->second)) {
            out.push_back(std::move(it->second));
            out.back().close();
            it = live.erase(it);
        } else {
            ++it;
        }
    }
    std::sort(out.begin(), out.end(),
              [](const FlowAccumulator& a, const FlowAccumulator& b) { return a.sequence() < b.sequence(); });
    return out;
}

}  // namespace

std::vector<FlowAccumulator> FlowTable::expire(std::int64_t now_us) {
    const auto timeout = config_.flow_timeout_us;
    return take_sorted(live_, [&](const FlowAccumulator& f) { return now_us - f.last_ts_us() >= timeout; });
}

std::vector<FlowAccumulator> FlowTable::flush() {
    return take_sorted(live_, [](const FlowAccumulator&) { return true; });
}

}  // namespace botflow
