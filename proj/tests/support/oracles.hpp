#pragma once

// Independent brute-force reference implementations used only by tests. None
// of these call into the library's scoring or statistics code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "emscore/embedding_store.hpp"

namespace emscore::testing {

struct OracleFine {
  double p;
  double r;
  double f;
};

// Direct double loop over the similarity matrix, written from the definition.
inline OracleFine oracle_fine(const std::vector<std::vector<double>>& tokens, const std::vector<double>& tw,
                              const std::vector<std::vector<double>>& ground, const std::vector<double>& gw) {
  auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  };
  double pn = 0, pd = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double best = -1e300;
    for (const auto& g : ground) best = std::max(best, cosine(tokens[i], g));
    pn += tw[i] * best;
    pd += tw[i];
  }
  double rn = 0, rd = 0;
  for (std::size_t j = 0; j < ground.size(); ++j) {
    double best = -1e300;
    for (const auto& t : tokens) best = std::max(best, cosine(t, ground[j]));
    rn += gw[j] * best;
    rd += gw[j];
  }
  const double p = pn / pd;
  const double r = rn / rd;
  return {p, r, (p > 0 && r > 0) ? 2 * p * r / (p + r) : 0.0};
}

// Kendall tau-b by enumerating all pairs.
inline double oracle_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, tie_x_only = 0, tie_y_only = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x_only;
      } else if (dy == 0) {
        ++tie_y_only;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double num = static_cast<double>(concordant - discordant);
  const double a = static_cast<double>(concordant + discordant + tie_y_only);
  const double b = static_cast<double>(concordant + discordant + tie_x_only);
  return num / std::sqrt(a * b);
}

// Mid-rank by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (const double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return oracle_pearson(oracle_ranks(x), oracle_ranks(y));
}

// idf by counting, for every token type, the documents that contain it.
inline std::map<std::string, double> oracle_idf(const std::vector<std::vector<std::string>>& corpus) {
  std::set<std::string> vocab;
  for (const auto& d : corpus) vocab.insert(d.begin(), d.end());
  std::map<std::string, double> out;
  for (const auto& t : vocab) {
    double df = 0;
    for (const auto& d : corpus) df += std::find(d.begin(), d.end(), t) != d.end() ? 1 : 0;
    out[t] = -std::log(df / static_cast<double>(corpus.size()));
  }
  return out;
}

// Random fixtures ------------------------------------------------------------

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double sq = 0;
  do {
    sq = 0;
    for (auto& x : v) {
      x = normal(rng);
      sq += x * x;
    }
  } while (sq < 1e-6);
  for (auto& x : v) x /= std::sqrt(sq);
  return v;
}

// Unit rows stored as float32, as they would be in an archive.
inline EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::vector<float> data;
  for (std::size_t i = 0; i < rows; ++i) {
    for (const double x : random_unit(rng, dim)) data.push_back(static_cast<float>(x));
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

inline std::vector<std::vector<double>> as_rows(const EmbeddingMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

inline CaptionRecord make_caption(std::string id, EmbeddingMatrix m, const std::string& prefix = "w") {
  CaptionRecord c{std::move(id), {}, std::move(m)};
  for (std::size_t i = 0; i < c.embeddings.rows(); ++i) {
    if (i == 0) {
      c.tokens.emplace_back(kDefaultSosToken);
    } else if (i + 1 == c.embeddings.rows()) {
      c.tokens.emplace_back(kDefaultEosToken);
    } else {
      c.tokens.push_back(prefix + std::to_string(i));
    }
  }
  return c;
}

// Values drawn from a small integer grid so ties are common.
inline std::vector<double> tie_heavy(std::mt19937_64& rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> d(1, levels);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace emscore::testing
