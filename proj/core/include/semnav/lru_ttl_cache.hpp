#pragma once

#include <cstddef>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <utility>

namespace semnav {

/// Bounded LRU cache whose entries expire `ttl` seconds after insertion.
/// Time is always passed in by the caller. Thread-safe; every operation takes
/// the lock because a hit also refreshes recency.
template <class Key, class Value>
class LruTtlCache {
 public:
  LruTtlCache(std::size_t capacity, double ttl_seconds) : capacity_(capacity), ttl_(ttl_seconds) {
    if (capacity_ == 0) {
      throw std::invalid_argument("cache capacity must be > 0");
    }
    if (!(ttl_ > 0.0)) {
      throw std::invalid_argument("cache ttl must be > 0");
    }
  }

  /// Entries with now - inserted_at > ttl are purged and reported as misses.
  std::optional<Value> get(const Key& key, double now) {
    std::lock_guard lock(mu_);
    auto it = index_.find(key);
    if (it == index_.end()) {
      return std::nullopt;
    }
    if (now - it->second->inserted_at > ttl_) {
      order_.erase(it->second);
      index_.erase(it);
      return std::nullopt;
    }
    order_.splice(order_.begin(), order_, it->second);
    return it->second->value;
  }

  void put(const Key& key, Value value, double now) {
    std::lock_guard lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) {
      it->second->value = std::move(value);
      it->second->inserted_at = now;
      order_.splice(order_.begin(), order_, it->second);
      return;
    }
    order_.push_front(Entry{key, std::move(value), now});
    index_.emplace(key, order_.begin());
    if (index_.size() > capacity_) {
      index_.erase(order_.back().key);
      order_.pop_back();
    }
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return index_.size();
  }
  std::size_t capacity() const { return capacity_; }
  double ttl() const { return ttl_; }

 private:
  struct Entry {
    Key key;
    Value value;
    double inserted_at;
  };

  std::size_t capacity_;
  double ttl_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // most recent first
  std::map<Key, typename std::list<Entry>::iterator> index_;
};

}  // namespace semnav
