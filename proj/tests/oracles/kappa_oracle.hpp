#pragma once
// Textbook kappa: (p_o - p_e) / (1 - p_e) in floating point.
#include <map>
#include <string>
#include <vector>

namespace oracle {

inline double kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const double n = static_cast<double>(a.size());
  double agree = 0;
  std::map<std::string, double> ma, mb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) agree += 1;
    ma[a[i]] += 1;
    mb[b[i]] += 1;
  }
  double po = agree / n, pe = 0;
  for (const auto& [k, v] : ma) pe += (v / n) * (mb.count(k) ? mb[k] / n : 0.0);
  return (po - pe) / (1 - pe);
}

}  // namespace oracle
