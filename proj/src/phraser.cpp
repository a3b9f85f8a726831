#include "fetch/phraser.hpp"

#include "fetch/common.hpp"

namespace fetch {

namespace {

bool is_alias(std::string_view t) {
  return t.size() >= 3 && t.front() == ':' && t.back() == ':';
}

}  // namespace

std::string PhraseLayer::pair_key(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a).push_back('\x1f');
  key.append(b);
  return key;
}

PhraseLayer PhraseLayer::learn(const TokenCorpus& corpus, const PhraserParams& params,
                               int max_components) {
  PhraseLayer layer;
  layer.params = params;
  layer.max_components = max_components;
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      ++layer.unigram_counts[sentence[i]];
      if (i + 1 < sentence.size()) ++layer.bigram_counts[pair_key(sentence[i], sentence[i + 1])];
    }
    layer.total_tokens += sentence.size();
  }
  return layer;
}

int PhraseLayer::components(std::string_view token) const {
  if (is_alias(token)) return 1;
  int n = 1;
  for (std::size_t pos = token.find(params.delimiter); pos != std::string_view::npos;
       pos = token.find(params.delimiter, pos + params.delimiter.size())) {
    ++n;
  }
  return n;
}

double PhraseLayer::score(std::string_view a, std::string_view b) const {
  auto ab = bigram_counts.find(pair_key(a, b));
  auto ca = unigram_counts.find(std::string(a));
  auto cb = unigram_counts.find(std::string(b));
  if (ab == bigram_counts.end() || ca == unigram_counts.end() || cb == unigram_counts.end()) {
    return -1.0;
  }
  double num = (static_cast<double>(ab->second) - static_cast<double>(params.min_count)) *
               static_cast<double>(total_tokens);
  return num / (static_cast<double>(ca->second) * static_cast<double>(cb->second));
}

bool PhraseLayer::should_merge(std::string_view a, std::string_view b) const {
  if (components(a) + components(b) > max_components) return false;
  return score(a, b) > params.threshold;
}

TokenStream PhraseLayer::apply(const TokenStream& tokens) const {
  TokenStream out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 1 < tokens.size() && should_merge(tokens[i], tokens[i + 1])) {
      out.push_back(tokens[i] + params.delimiter + tokens[i + 1]);
      i += 2;
    } else {
      out.push_back(tokens[i]);
      i += 1;
    }
  }
  return out;
}

std::set<std::string> PhraseLayer::phrasegrams() const {
  std::set<std::string> out;
  for (const auto& [key, count] : bigram_counts) {
    auto sep = key.find('\x1f');
    std::string_view a(key.data(), sep);
    std::string_view b(key.data() + sep + 1, key.size() - sep - 1);
    if (should_merge(a, b)) out.insert(std::string(a) + params.delimiter + std::string(b));
  }
  return out;
}

PhraserModel PhraserModel::learn(const TokenCorpus& corpus, const PhraserParams& params,
                                 int passes) {
  if (passes < 1 || passes > 2) throw Error("phraser passes must be 1 or 2");
  PhraserModel model;
  TokenCorpus current = corpus;
  for (int p = 0; p < passes; ++p) {
    PhraseLayer layer = PhraseLayer::learn(current, params, p + 2);
    if (p + 1 < passes) {
      for (auto& s : current) s = layer.apply(s);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

TokenStream PhraserModel::apply(const TokenStream& tokens) const {
  TokenStream out = tokens;
  for (const auto& layer : layers) out = layer.apply(out);
  return out;
}

nlohmann::json PhraserModel::summary() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto& l : layers) {
    layers_json.push_back({{"min_count", l.params.min_count},
                           {"threshold", l.params.threshold},
                           {"total_tokens", l.total_tokens},
                           {"phrasegrams", l.phrasegrams().size()}});
  }
  return {{"passes", layers.size()}, {"layers", layers_json}};
}

TokenCorpus merge_phrases(const TokenCorpus& corpus, const PhraserModel& model) {
  TokenCorpus out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(model.apply(s));
  return out;
}

std::string phrase_token_to_surface(std::string_view token, std::string_view delimiter) {
  if (is_alias(token)) return std::string(token);
  std::string out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = token.find(delimiter, start);
    out.append(token.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    out.push_back(' ');
    start = pos + delimiter.size();
  }
  return out;
}

std::string surface_to_phrase_token(std::string_view surface, std::string_view delimiter) {
  return join(split_ws(ascii_lower(surface)), delimiter);
}

}  // namespace fetch
