#include <sstream>

#include "riskdiv/exp_solver.hpp"

namespace riskdiv {

int BandFunction::evaluate(int x) const {
  if (x <= c.front()) return 0;
  for (size_t k = 0; k < d.size(); ++k) {
    if (x < d[k]) return x - c[k];
    if (x <= c[k + 1]) return 0;
  }
  return x - c.back();
}

std::string BandFunction::cuts_string() const {
  std::ostringstream os;
  os << c.front();
  for (size_t k = 0; k < d.size(); ++k) os << ';' << d[k] << ';' << c[k + 1];
  return os.str();
}

BandFunction extract_band(std::span<const std::int32_t> column) {
  auto fail = [](int x, const char* why) {
    std::ostringstream os;
    os << "column is not a band function at x=" << x << ": " << why;
    throw Error(ErrorCode::NotABand, os.str());
  };
  const int X = static_cast<int>(column.size()) - 1;
  if (X < 0) fail(0, "empty column");
  BandFunction b;
  int x = 0;
  // Zero run ending at c_k, then a pay-down run to c_k, then the next zero run.
  while (true) {
    if (column[static_cast<size_t>(x)] != 0) fail(x, "expected a zero run");
    while (x < X && column[static_cast<size_t>(x) + 1] == 0) ++x;
    b.c.push_back(x);
    if (x == X) break;
    const int ck = x;
    ++x;
    while (x <= X && column[static_cast<size_t>(x)] != 0) {
      if (column[static_cast<size_t>(x)] != x - ck) fail(x, "pay-down run does not pay to the band edge");
      ++x;
    }
    if (x > X) break;
    b.d.push_back(x);
  }
  for (size_t k = 0; k < b.d.size(); ++k)
    if (b.d[k] - b.c[k] < 2) fail(b.d[k], "band gap shorter than 2");
  for (int y = 0; y <= X; ++y)
    if (b.evaluate(y) != column[static_cast<size_t>(y)]) fail(y, "reconstruction mismatch");
  return b;
}

std::vector<BandFunction> extract_bands(const ExpPolicy& policy) {
  std::vector<BandFunction> out;
  out.reserve(static_cast<size_t>(policy.depth()));
  for (int n = 0; n < policy.depth(); ++n) out.push_back(extract_band(policy.column(n)));
  return out;
}

}  // namespace riskdiv
