#include "fetch/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "fetch/common.hpp"

namespace fetch {

namespace {

constexpr double kMaxExp = 6.0;

float dot(const float* a, const float* b, int n) {
  float s = 0.f;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

struct TrainState {
  const Word2VecParams& p;
  std::vector<float>& syn0;
  std::vector<float>& syn1;
  std::vector<double> noise_cdf;       // unigram^0.75
  std::vector<double> keep_prob;       // subsampling
  std::uint64_t total_words = 0;       // epochs * in-vocab words
  std::atomic<std::uint64_t> processed{0};
};

// Plain or relaxed-atomic access to shared weights.
template <bool kShared>
struct Weights {
  static float load(const float& x) {
    if constexpr (kShared) {
      return std::atomic_ref<const float>(x).load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void add(float& x, float v) {
    if constexpr (kShared) {
      std::atomic_ref<float> r(x);
      r.store(r.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
    } else {
      x += v;
    }
  }
};

template <bool kShared>
void train_pair(TrainState& st, std::size_t center, std::size_t context, double alpha, Rng& rng,
                std::vector<float>& l1_copy, std::vector<float>& grad) {
  using W = Weights<kShared>;
  const int d = st.p.dim;
  float* l1 = &st.syn0[context * static_cast<std::size_t>(d)];
  for (int i = 0; i < d; ++i) l1_copy[static_cast<std::size_t>(i)] = W::load(l1[i]);
  std::fill(grad.begin(), grad.end(), 0.f);

  for (int n = 0; n <= st.p.negative; ++n) {
    std::size_t target;
    float label;
    if (n == 0) {
      target = center;
      label = 1.f;
    } else {
      double u = rng.uniform() * st.noise_cdf.back();
      target = static_cast<std::size_t>(
          std::upper_bound(st.noise_cdf.begin(), st.noise_cdf.end(), u) - st.noise_cdf.begin());
      target = std::min(target, st.noise_cdf.size() - 1);
      if (target == center) continue;
      label = 0.f;
    }
    float* l2 = &st.syn1[target * static_cast<std::size_t>(d)];
    float f = 0.f;
    for (int i = 0; i < d; ++i) f += l1_copy[static_cast<std::size_t>(i)] * W::load(l2[i]);
    float g;
    if (f > kMaxExp) {
      g = static_cast<float>((label - 1.0) * alpha);
    } else if (f < -kMaxExp) {
      g = static_cast<float>(label * alpha);
    } else {
      g = static_cast<float>((label - 1.0 / (1.0 + std::exp(-f))) * alpha);
    }
    for (int i = 0; i < d; ++i) {
      grad[static_cast<std::size_t>(i)] += g * W::load(l2[i]);
      W::add(l2[i], g * l1_copy[static_cast<std::size_t>(i)]);
    }
  }
  for (int i = 0; i < d; ++i) W::add(l1[i], grad[static_cast<std::size_t>(i)]);
}

template <bool kShared>
void train_shard(TrainState& st, const std::vector<std::vector<std::size_t>>& sentences,
                 std::size_t begin, std::size_t end, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> l1_copy(static_cast<std::size_t>(st.p.dim));
  std::vector<float> grad(static_cast<std::size_t>(st.p.dim));
  std::vector<std::size_t> kept;
  for (int epoch = 0; epoch < st.p.epochs; ++epoch) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto& sent = sentences[s];
      std::uint64_t done = st.processed.fetch_add(sent.size(), std::memory_order_relaxed);
      double progress = static_cast<double>(done) / static_cast<double>(st.total_words);
      double alpha = std::max(st.p.min_alpha, st.p.alpha - (st.p.alpha - st.p.min_alpha) * progress);

      kept.clear();
      for (std::size_t w : sent) {
        if (st.p.sample > 0 && st.keep_prob[w] < 1.0 && rng.uniform() > st.keep_prob[w]) continue;
        kept.push_back(w);
      }
      for (std::size_t pos = 0; pos < kept.size(); ++pos) {
        auto shrink = static_cast<int>(rng.below(static_cast<std::uint64_t>(st.p.window)));
        int span = st.p.window - shrink;
        std::size_t lo = pos >= static_cast<std::size_t>(span) ? pos - static_cast<std::size_t>(span) : 0;
        std::size_t hi = std::min(kept.size() - 1, pos + static_cast<std::size_t>(span));
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          train_pair<kShared>(st, kept[pos], kept[c], alpha, rng, l1_copy, grad);
        }
      }
    }
  }
}

}  // namespace

EmbeddingModel::EmbeddingModel(std::vector<std::string> tokens, std::vector<float> vectors,
                               int dim, std::uint64_t seed, int epochs)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)), dim_(dim), seed_(seed),
      epochs_(epochs) {
  if (dim_ <= 0) throw Error("embedding dim must be positive");
  if (vectors_.size() != tokens_.size() * static_cast<std::size_t>(dim_)) {
    throw Error("embedding matrix does not match vocabulary size x dim");
  }
  rebuild_index();
}

void EmbeddingModel::rebuild_index() {
  index_.clear();
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw Error("duplicate vocabulary token: " + tokens_[i]);
  }
  const auto d = static_cast<std::size_t>(dim_);
  unit_.assign(vectors_.size(), 0.f);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const float* v = &vectors_[i * d];
    double norm = std::sqrt(static_cast<double>(dot(v, v, dim_)));
    if (norm == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) unit_[i * d + j] = static_cast<float>(v[j] / norm);
  }
}

std::vector<std::pair<std::string, std::uint64_t>> EmbeddingModel::build_vocab(
    const TokenCorpus& corpus, std::uint64_t min_count, std::size_t max_vocab) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& s : corpus) {
    for (const auto& t : s) ++counts[t];
  }
  std::vector<std::pair<std::string, std::uint64_t>> vocab;
  for (auto& [t, c] : counts) {
    if (c >= min_count) vocab.emplace_back(t, c);
  }
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (vocab.size() > max_vocab) vocab.resize(max_vocab);
  return vocab;
}

EmbeddingModel EmbeddingModel::train(const TokenCorpus& corpus, const Word2VecParams& p) {
  if (p.dim <= 0 || p.window <= 0 || p.epochs <= 0 || p.negative < 0) {
    throw Error("invalid word2vec parameters");
  }
  auto vocab = build_vocab(corpus, p.min_count, p.max_vocab);
  if (vocab.empty()) throw Error("empty vocabulary after min_count filtering");

  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    index.emplace(vocab[i].first, i);
    tokens.push_back(vocab[i].first);
  }
  std::vector<std::vector<std::size_t>> sentences;
  std::uint64_t train_words = 0;
  for (const auto& s : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& t : s) {
      auto it = index.find(t);
      if (it != index.end()) ids.push_back(it->second);
    }
    train_words += ids.size();
    if (ids.size() >= 2) sentences.push_back(std::move(ids));
  }

  const auto d = static_cast<std::size_t>(p.dim);
  std::vector<float> syn0(vocab.size() * d);
  std::vector<float> syn1(vocab.size() * d, 0.f);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    // Per-token seeding keeps initial vectors independent of vocabulary order.
    Rng init(p.seed ^ fnv1a64(tokens[i]));
    for (std::size_t j = 0; j < d; ++j) {
      syn0[i * d + j] = static_cast<float>((init.uniform() - 0.5) / static_cast<double>(p.dim));
    }
  }

  TrainState st{p, syn0, syn1, {}, {}, 0, {}};
  st.noise_cdf.resize(vocab.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    st.noise_cdf[i] = acc;
  }
  st.keep_prob.resize(vocab.size(), 1.0);
  if (p.sample > 0) {
    double threshold = p.sample * static_cast<double>(train_words);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      auto f = static_cast<double>(vocab[i].second);
      st.keep_prob[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
    }
  }
  st.total_words = std::max<std::uint64_t>(1, train_words * static_cast<std::uint64_t>(p.epochs));

  int threads = std::max(1, p.threads);
  if (threads == 1 || sentences.size() < 2) {
    train_shard<false>(st, sentences, 0, sentences.size(), p.seed);
  } else {
    std::vector<std::jthread> pool;
    std::size_t per = (sentences.size() + static_cast<std::size_t>(threads) - 1) /
                      static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      std::size_t b = static_cast<std::size_t>(t) * per;
      std::size_t e = std::min(sentences.size(), b + per);
      if (b >= e) break;
      pool.emplace_back([&st, &sentences, b, e, seed = p.seed + static_cast<std::uint64_t>(t)] {
        train_shard<true>(st, sentences, b, e, seed);
      });
    }
  }
  return EmbeddingModel(std::move(tokens), std::move(syn0), p.dim, p.seed, p.epochs);
}

std::optional<std::size_t> EmbeddingModel::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingModel::vector(std::size_t i) const {
  return {vectors_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::span<const float> EmbeddingModel::unit_vector(std::size_t i) const {
  return {unit_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::optional<double> EmbeddingModel::similarity(std::string_view a, std::string_view b) const {
  auto ia = index_of(a), ib = index_of(b);
  if (!ia || !ib) return std::nullopt;
  auto va = unit_vector(*ia), vb = unit_vector(*ib);
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += static_cast<double>(va[static_cast<std::size_t>(i)]) * vb[static_cast<std::size_t>(i)];
  return s;
}

std::vector<Neighbor> EmbeddingModel::nearest_to(std::span<const float> query, std::size_t k,
                                                 std::optional<std::size_t> exclude) const {
  if (k == 0 || query.size() != static_cast<std::size_t>(dim_)) return {};
  double qnorm = 0.0;
  for (float x : query) qnorm += static_cast<double>(x) * x;
  qnorm = std::sqrt(qnorm);
  if (qnorm == 0.0) return {};

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(tokens_.size());
  const auto d = static_cast<std::size_t>(dim_);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (exclude && *exclude == i) continue;
    const float* u = &unit_[i * d];
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += static_cast<double>(u[j]) * query[j];
    scored.emplace_back(s / qnorm, i);
  }
  auto better = [this](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : tokens_[a.second] < tokens_[b.second];
  };
  std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({tokens_[scored[i].second], scored[i].first});
  }
  return out;
}

SimilarResult EmbeddingModel::most_similar(std::string_view query, std::size_t k) const {
  SimilarResult r;
  auto idx = index_of(query);
  if (!idx) {
    r.oov = true;
    return r;
  }
  r.items = nearest_to(unit_vector(*idx), k, idx);
  return r;
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file: " + path.string());
  write_u32(out, static_cast<std::uint32_t>(dim_));
  write_u64(out, tokens_.size());
  write_u64(out, seed_);
  write_u32(out, static_cast<std::uint32_t>(epochs_));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    write_u32(out, static_cast<std::uint32_t>(tokens_[i].size()));
    out.write(tokens_[i].data(), static_cast<std::streamsize>(tokens_[i].size()));
    write_f32s(out, vector(i).data(), static_cast<std::size_t>(dim_));
  }
  if (!out) throw Error("failed writing model file: " + path.string());
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path.string());
  auto dim = static_cast<int>(read_u32(in));
  std::uint64_t n = read_u64(in);
  std::uint64_t seed = read_u64(in);
  auto epochs = static_cast<int>(read_u32(in));
  if (dim <= 0 || dim > 100000) throw Error("model file has invalid dim");
  std::vector<std::string> tokens;
  std::vector<float> vectors;
  tokens.reserve(n);
  vectors.resize(n * static_cast<std::size_t>(dim));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t len = read_u32(in);
    std::string t(len, '\0');
    in.read(t.data(), len);
    if (static_cast<std::uint32_t>(in.gcount()) != len) throw Error("truncated model file");
    tokens.push_back(std::move(t));
    read_f32s(in, &vectors[i * static_cast<std::size_t>(dim)], static_cast<std::size_t>(dim));
  }
  return EmbeddingModel(std::move(tokens), std::move(vectors), dim, seed, epochs);
}

}  // namespace fetch
