#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "muse/chat.hpp"
#include "muse/error.hpp"

namespace muse {

// Price table: model name -> cost per 1k input / output tokens.
struct ModelPrice {
  double input_per_1k = 0.0;
  double output_per_1k = 0.0;
};

class PriceTable {
 public:
  void set(const std::string& model, ModelPrice price) { prices_[model] = price; }

  bool has(const std::string& model) const { return prices_.count(model) > 0; }

  ModelPrice get(const std::string& model) const {
    auto it = prices_.find(model);
    return it == prices_.end() ? ModelPrice{} : it->second;
  }

  static PriceTable from_json(const nlohmann::json& doc) {
    PriceTable table;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const auto& row = it.value();
      table.set(it.key(), {row.at("input_per_1k").get<double>(),
                           row.at("output_per_1k").get<double>()});
    }
    return table;
  }

  static PriceTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MuseError(ErrorKind::config, "cannot read price table: " + path);
    nlohmann::json doc;
    in >> doc;
    return from_json(doc);
  }

 private:
  std::map<std::string, ModelPrice> prices_;
};

// Per-run token accounting. Updates are serialized internally so complete()
// may be called from several threads.
class UsageLedger {
 public:
  struct Totals {
    long input_tokens = 0;
    long output_tokens = 0;
    long calls = 0;
  };

  void record(const std::string& model, long input_tokens, long output_tokens,
              bool approximate = false) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& t = per_model_[model];
    t.input_tokens += input_tokens;
    t.output_tokens += output_tokens;
    t.calls += 1;
    approximate_ = approximate_ || approximate;
  }

  Totals totals() const {
    std::lock_guard<std::mutex> lock(mutex_);
    Totals sum;
    for (const auto& [_, t] : per_model_) {
      sum.input_tokens += t.input_tokens;
      sum.output_tokens += t.output_tokens;
      sum.calls += t.calls;
    }
    return sum;
  }

  Totals totals_for(const std::string& model) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = per_model_.find(model);
    return it == per_model_.end() ? Totals{} : it->second;
  }

  long call_count() const { return totals().calls; }
  bool approximate() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return approximate_;
  }

  // cost = in/1000 * input_price + out/1000 * output_price, summed per model.
  double cost(const PriceTable& prices) const {
    std::lock_guard<std::mutex> lock(mutex_);
    double sum = 0.0;
    for (const auto& [model, t] : per_model_) {
      ModelPrice p = prices.get(model);
      sum += t.input_tokens / 1000.0 * p.input_per_1k +
             t.output_tokens / 1000.0 * p.output_per_1k;
    }
    return sum;
  }

  std::vector<std::string> models() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::string> names;
    for (const auto& [model, _] : per_model_) names.push_back(model);
    return names;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Totals> per_model_;
  bool approximate_ = false;
};

// "25.0k" style rendering used by the cost report.
inline std::string format_kilotokens(long tokens) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fk", tokens / 1000.0);
  return buf;
}

struct CostRow {
  std::string label;
  long input_tokens = 0;
  long output_tokens = 0;
  double cost = 0.0;
  bool approximate = false;
};

inline std::string format_cost_row(const CostRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%s/%s,$%.3f%s", row.label.c_str(),
                format_kilotokens(row.input_tokens).c_str(),
                format_kilotokens(row.output_tokens).c_str(), row.cost,
                row.approximate ? ",approx" : "");
  return buf;
}

// Per-run and per-model aggregates in the shape of a cost table:
// label, tokens in/out, cost per case.
inline std::vector<CostRow> report_usage(const UsageLedger& ledger, const PriceTable& prices) {
  std::vector<CostRow> rows;
  for (const auto& model : ledger.models()) {
    auto t = ledger.totals_for(model);
    PriceTable one;
    one.set(model, prices.get(model));
    UsageLedger scoped;
    scoped.record(model, t.input_tokens, t.output_tokens);
    rows.push_back({model, t.input_tokens, t.output_tokens, scoped.cost(one),
                    ledger.approximate()});
  }
  auto t = ledger.totals();
  rows.push_back({"total", t.input_tokens, t.output_tokens, ledger.cost(prices),
                  ledger.approximate()});
  return rows;
}

} // namespace muse
