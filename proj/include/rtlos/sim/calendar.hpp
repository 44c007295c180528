#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtlos::sim {

template <class Payload>
struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  Payload payload{};
};

// Future event list with a simulation clock. Events pop in (time, sequence)
// order, so equal-time events are dispatched in insertion order. The calendar
// is a plain value: copying it is a snapshot, assigning one back is a restore.
template <class Payload>
class EventCalendar {
 public:
  using event_type = Event<Payload>;

  double now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::uint64_t next_sequence() const { return next_sequence_; }

  double next_time() const {
    if (heap_.empty()) throw std::logic_error("next_time() on empty calendar");
    return heap_.front().time;
  }

  const std::vector<event_type>& pending() const { return heap_; }

  std::uint64_t schedule(double time, Payload payload) {
    if (time < now_)
      throw std::logic_error("event scheduled in the past: t=" + std::to_string(time) +
                             " < now=" + std::to_string(now_));
    const std::uint64_t seq = next_sequence_++;
    heap_.push_back(event_type{time, seq, std::move(payload)});
    std::push_heap(heap_.begin(), heap_.end(), later);
    return seq;
  }

  event_type pop() {
    if (heap_.empty()) throw std::logic_error("pop() on empty calendar");
    std::pop_heap(heap_.begin(), heap_.end(), later);
    event_type ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.time;
    return ev;
  }

  void advance_to(double time) {
    if (time < now_) throw std::logic_error("clock cannot move backwards");
    now_ = time;
  }

  // Dispatches every event with time <= `until`, then sets the clock to `until`.
  template <class Handler>
  std::size_t run_until(double until, Handler&& handler) {
    std::size_t processed = 0;
    while (!heap_.empty() && heap_.front().time <= until) {
      event_type ev = pop();
      handler(ev);
      ++processed;
    }
    if (until > now_) now_ = until;
    return processed;
  }

 private:
  static bool later(const event_type& lhs, const event_type& rhs) {
    if (lhs.time != rhs.time) return lhs.time > rhs.time;
    return lhs.sequence > rhs.sequence;
  }

  std::vector<event_type> heap_;
  std::uint64_t next_sequence_ = 0;
  double now_ = 0.0;
};

}  // namespace rtlos::sim
