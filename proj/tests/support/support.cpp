#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "kgamc/nn/ops.hpp"

namespace kgamc::testing {
namespace {

double cosine(const double* a, const double* b, std::size_t d) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < d; ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na <= 1e-12 || nb <= 1e-12) return 0.0;
  return dot / (na * nb);
}

double log_softmax_at(const std::vector<double>& row, std::size_t k) {
  double peak = row[0];
  for (double v : row) peak = std::max(peak, v);
  double total = 0;
  for (double v : row) total += std::exp(v - peak);
  return row[k] - peak - std::log(total);
}

GradReport compare(const std::function<double()>& eval, std::vector<nn::Var<double>>& leaves,
                   const std::vector<nn::Tensor<double>>& analytic, double h, double floor) {
  GradReport report;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    auto& value = leaves[i].mutable_value();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double saved = value.data[k];
      value.data[k] = saved + h;
      const double up = eval();
      value.data[k] = saved - h;
      const double down = eval();
      value.data[k] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[i].data[k];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++report.checked;
      if (rel > report.max_rel_error || !std::isfinite(rel)) {
        report.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        std::ostringstream os;
        os << "input " << i << "[" << k << "]: analytic " << a << ", numeric " << numeric;
        report.worst = os.str();
      }
    }
  }
  return report;
}

}  // namespace

GradReport gradcheck(const ScalarFn& f, const std::vector<nn::Tensor<double>>& inputs, double h,
                     double floor) {
  std::vector<nn::Var<double>> leaves;
  for (const auto& t : inputs) leaves.push_back(nn::parameter(t));
  const auto loss = f(leaves);
  nn::backward(loss);
  std::vector<nn::Tensor<double>> analytic;
  for (const auto& l : leaves) analytic.push_back(l.grad());
  auto eval = [&] {
    nn::NoGradGuard guard;
    return f(leaves).item();
  };
  return compare(eval, leaves, analytic, h, floor);
}

GradReport gradcheck_params(const std::function<nn::Var<double>()>& f,
                            std::vector<nn::Var<double>> params, double h, double floor) {
  for (auto& p : params) p.zero_grad();
  nn::backward(f());
  std::vector<nn::Tensor<double>> analytic;
  for (const auto& p : params) analytic.push_back(p.grad());
  auto eval = [&] {
    nn::NoGradGuard guard;
    return f().item();
  };
  return compare(eval, params, analytic, h, floor);
}

nn::Tensor<double> random_tensor(nn::Shape shape, std::mt19937_64& rng, double scale) {
  nn::Tensor<double> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, scale);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

nn::Var<double> random_projection(const nn::Var<double>& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto r = nn::constant(random_tensor(x.shape(), rng));
  const auto flat_x = nn::reshape(x, {1, x.size()});
  const auto flat_r = nn::reshape(r, {1, x.size()});
  return nn::reshape(nn::matmul_nt(flat_x, flat_r), {1});
}

mkg::HeteroGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes,
                              std::size_t num_relations, double edge_probability) {
  std::uniform_int_distribution<std::size_t> count(1, max_nodes);
  std::uniform_int_distribution<std::size_t> type(0, mkg::kNumNodeTypes - 1);
  std::uniform_int_distribution<std::size_t> rel(0, num_relations - 1);
  std::bernoulli_distribution edge(edge_probability);
  const std::size_t a = count(rng);
  std::vector<std::string> names;
  std::vector<mkg::NodeType> types;
  for (std::size_t i = 0; i < a; ++i) {
    names.push_back("n" + std::to_string(i));
    types.push_back(static_cast<mkg::NodeType>(type(rng)));
  }
  std::array<std::vector<mkg::Edge>, mkg::kNumRelations> edges;
  for (std::size_t s = 0; s < a; ++s) {
    for (std::size_t d = 0; d < a; ++d) {
      if (s != d && edge(rng)) edges[rel(rng)].push_back({s, d});
    }
  }
  return mkg::HeteroGraph::from_edges(names, types, edges);
}

nn::Tensor<double> features_oracle(const mkg::HeteroGraph& g) {
  const std::size_t a = g.names.size();
  std::vector<std::set<std::size_t>> undirected(a);
  std::vector<double> out(a, 0), in(a, 0);
  std::vector<std::vector<int>> adj(a, std::vector<int>(a, 0));
  for (const auto& rel : g.edges) {
    for (const auto& e : rel) {
      out[e.src] += 1;
      in[e.dst] += 1;
      adj[e.src][e.dst] = 1;
      if (e.src != e.dst) {
        undirected[e.src].insert(e.dst);
        undirected[e.dst].insert(e.src);
      }
    }
  }
  const std::size_t b = 12 + a;
  nn::Tensor<double> m({a, b});
  for (std::size_t s = 0; s < a; ++s) {
    std::vector<int> dist(a, -1);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto v : undirected[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    double first = 0, second = 0;
    for (std::size_t v = 0; v < a; ++v) {
      first += dist[v] == 1;
      second += dist[v] == 2;
    }
    double* row = m.data.data() + s * b;
    row[0] = first;
    row[1] = second;
    row[2] = out[s];
    row[3] = in[s];
    row[4 + static_cast<std::size_t>(g.types[s])] = 1;
    for (std::size_t v = 0; v < a; ++v) row[12 + v] = adj[s][v];
  }
  return m;
}

nn::Tensor<double> scaled_features_oracle(const mkg::HeteroGraph& g) {
  auto m = features_oracle(g);
  const std::size_t a = m.shape[0], b = m.shape[1];
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<double> col;
    for (std::size_t i = 0; i < a; ++i) col.push_back(m.data[i * b + c]);
    const double lo = *std::min_element(col.begin(), col.end());
    const double hi = *std::max_element(col.begin(), col.end());
    for (std::size_t i = 0; i < a; ++i) {
      m.data[i * b + c] = hi == lo ? 0.0 : (col[i] - lo) / (hi - lo);
    }
  }
  return m;
}

nn::Tensor<double> hetero_layer_oracle(const mkg::HeteroGraph& g, const nn::Tensor<double>& feats,
                                       const std::array<nn::Tensor<double>, mkg::kNumRelations>& w) {
  const std::size_t a = feats.shape[0], din = feats.shape[1];
  const std::size_t dout = w[0].shape[1];
  nn::Tensor<double> out({a, dout});
  for (std::size_t i = 0; i < a; ++i) {
    std::vector<std::vector<double>> unit_outputs;
    std::vector<bool> active;
    for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
      std::vector<double> mean(din, 0.0);
      std::size_t count = 0;
      for (const auto& e : g.edges[r]) {
        if (e.dst != i) continue;
        ++count;
        for (std::size_t k = 0; k < din; ++k) mean[k] += feats.data[e.src * din + k];
      }
      if (count) {
        for (auto& v : mean) v /= static_cast<double>(count);
      }
      std::vector<double> joined(feats.data.begin() + static_cast<std::ptrdiff_t>(i * din),
                                 feats.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * din));
      joined.insert(joined.end(), mean.begin(), mean.end());
      std::vector<double> h(dout, 0.0);
      for (std::size_t o = 0; o < dout; ++o) {
        for (std::size_t k = 0; k < 2 * din; ++k) h[o] += joined[k] * w[r].data[k * dout + o];
        if (h[o] < 0) h[o] *= 0.01;
      }
      double norm = 0;
      for (double v : h) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-12) {
        for (auto& v : h) v /= norm;
      }
      unit_outputs.push_back(h);
      active.push_back(count > 0);
    }
    const auto n_active = std::count(active.begin(), active.end(), true);
    for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
      if (n_active > 0 && !active[r]) continue;
      const double weight = 1.0 / static_cast<double>(n_active > 0 ? n_active : mkg::kNumRelations);
      for (std::size_t o = 0; o < dout; ++o) out.data[i * dout + o] += weight * unit_outputs[r][o];
    }
  }
  return out;
}

nn::Tensor<double> conv1d_oracle(const nn::Tensor<double>& x, const nn::Tensor<double>& w,
                                 const nn::Tensor<double>& b, std::size_t stride) {
  const std::size_t cin = x.shape[0], n = x.shape[1], t = x.shape[2];
  const std::size_t cout = w.shape[0], k = w.shape[2];
  const std::size_t pad = (k - 1) / 2;
  const std::size_t tout = (t + stride - 1) / stride;
  nn::Tensor<double> y({cout, n, tout});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t p = 0; p < tout; ++p) {
        double acc = b.data[o];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t j = 0; j < k; ++j) {
            const long src = static_cast<long>(p * stride + j) - static_cast<long>(pad);
            if (src < 0 || src >= static_cast<long>(t)) continue;
            acc += w.data[(o * cin + c) * k + j] * x.data[(c * n + s) * t + static_cast<std::size_t>(src)];
          }
        }
        y.data[(o * n + s) * tout + p] = acc;
      }
    }
  }
  return y;
}

double npair_oracle(const nn::Tensor<double>& x, const nn::Tensor<double>& anchors,
                    std::span<const int> labels) {
  const std::size_t n = x.shape[0], d = x.shape[1], m = anchors.shape[0];
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(m);
    for (std::size_t k = 0; k < m; ++k) row[k] = cosine(&x.data[i * d], &anchors.data[k * d], d);
    total -= log_softmax_at(row, static_cast<std::size_t>(labels[i]));
  }
  return total / static_cast<double>(n);
}

double penalty_oracle(const nn::Tensor<double>& anchors) {
  const std::size_t m = anchors.shape[0], d = anchors.shape[1];
  double total = 0;
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = l + 1; k < m; ++k) total += cosine(&anchors.data[l * d], &anchors.data[k * d], d);
  }
  const double y = 2.0 * total / static_cast<double>(m * (m - 1));
  return std::max(0.0, y);
}

double ce_oracle(const nn::Tensor<double>& logits, std::span<const int> labels) {
  const std::size_t n = logits.shape[0], m = logits.shape[1];
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(logits.data.begin() + static_cast<std::ptrdiff_t>(i * m),
                            logits.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    total -= log_softmax_at(row, static_cast<std::size_t>(labels[i]));
  }
  return total / static_cast<double>(n);
}

double ScalarAdam::step(double p, double g, double lr, double wd, int t) {
  p = p - lr * wd * p;
  m = 0.9 * m + 0.1 * g;
  v = 0.999 * v + 0.001 * g * g;
  const double mhat = m / (1 - std::pow(0.9, t));
  const double vhat = v / (1 - std::pow(0.999, t));
  return p - lr * mhat / (std::sqrt(vhat) + 1e-8);
}

}  // namespace kgamc::testing
