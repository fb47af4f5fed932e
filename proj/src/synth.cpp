#include "tabgraph/synth.hpp"

#include <algorithm>

#include "tabgraph/errors.hpp"
#include "tabgraph/rng.hpp"

namespace tabgraph {

namespace {

const char* kEntityWords[] = {
    "acme",    "zenith",  "orion",   "vortex",  "lumen",   "quartz",  "nimbus",
    "falcon",  "cedar",   "aurora",  "basalt",  "comet",   "delta",   "ember",
    "fjord",   "garnet",  "harbor",  "iris",    "jasper",  "krill",   "lotus",
    "mesa",    "nectar",  "onyx",    "prism",   "quill",   "raven",   "sable",
    "tundra",  "umber",   "velvet",  "willow",  "xenon",   "yarrow",  "zephyr",
    "amber",   "breeze",  "cobalt",  "drift",   "echo"};

const char* kValueWords[] = {
    "alpha",   "bravo",   "charlie", "dakota",  "evening", "foxtrot", "golf",
    "hotel",   "india",   "juliet",  "kilo",    "lima",    "mike",    "november",
    "oscar",   "papa",    "quebec",  "romeo",   "sierra",  "tango",   "uniform",
    "victor",  "whiskey", "xray",    "yankee",  "zulu",    "maple",   "pine",
    "oak",     "birch",   "elm",     "ash",     "fir",     "spruce",  "larch",
    "aspen",   "rowan",   "hazel",   "alder",   "beech"};

const char* kClassWords[] = {
    "city",     "country", "year",   "price",  "rating", "team",
    "language", "animal",  "color",  "genre",  "author", "brand",
    "river",    "planet",  "metal",  "fruit",  "sport",  "tool"};

const char* kKeywordWords[] = {
    "travel",  "finance", "history", "science", "music",  "cinema",
    "cooking", "fitness", "nature",  "weather", "soccer", "chess",
    "garden",  "market",  "energy",  "housing"};

const char* kFillerWords[] = {
    "best", "top",   "guide", "world", "list",  "facts", "about", "known",
    "new",  "daily", "local", "full",  "major", "small", "wide",  "rare"};

template <std::size_t N>
std::vector<std::string> make_pool(const char* (&base)[N], std::size_t count,
                                   const char* prefix) {
  std::vector<std::string> pool;
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (i < N) pool.emplace_back(base[i]);
    else pool.push_back(std::string(prefix) + std::to_string(i));
  }
  return pool;
}

// k distinct indices from [0, n)
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.uniform_int(pool.size())];
}

struct Pools {
  std::vector<std::string> entities, values, classes, keywords, fillers;
};

Pools make_pools(const SynthSpec& spec) {
  Pools p;
  p.entities = make_pool(kEntityWords, spec.entities, "entity");
  p.values = make_pool(kValueWords, spec.values, "value");
  p.classes = make_pool(kClassWords, spec.classes, "class");
  p.keywords = make_pool(kKeywordWords, spec.keywords, "topic");
  p.fillers = make_pool(kFillerWords, spec.fillers, "word");
  return p;
}

LabeledExample make_row_lookup(const SynthSpec& spec, const Pools& pools, int label,
                               Rng& rng) {
  const std::size_t r = std::max<std::size_t>(spec.rows, 2);
  const auto e_idx = sample_distinct(pools.entities.size(), r, rng);
  const auto u_idx = sample_distinct(pools.values.size(), r, rng);
  const std::size_t target = rng.uniform_int(r);

  LabeledExample ex;
  ex.label = label;
  ex.query = pools.entities[e_idx[target]] + " value " + pools.values[u_idx[target]];
  ex.example.kind = TableKind::table;
  ex.example.caption = pick(pools.fillers, rng) + " " + pick(pools.fillers, rng);
  ex.example.header = std::vector<std::string>{"item", "value"};
  for (std::size_t i = 0; i < r; ++i) {
    // negatives shift the value column one row down: same bag of words,
    // but the queried pair no longer shares a row
    const std::size_t vi = label == 1 ? i : (i + 1) % r;
    ex.example.body.push_back({pools.entities[e_idx[i]], pools.values[u_idx[vi]]});
  }
  return ex;
}

LabeledExample make_header_class(const SynthSpec& spec, const Pools& pools, int label,
                                 Rng& rng) {
  const std::size_t n = std::min(std::max<std::size_t>(spec.cols, 2),
                                 pools.classes.size() - 1);
  const auto c_idx = sample_distinct(pools.classes.size(), n + 1, rng);
  // the first n classes become headers; the held-out one drives negatives
  LabeledExample ex;
  ex.label = label;
  ex.example.kind = TableKind::table;
  ex.example.caption = pick(pools.fillers, rng) + " " + pick(pools.fillers, rng);
  std::vector<std::string> header;
  for (std::size_t j = 0; j < n; ++j) header.push_back(pools.classes[c_idx[j]]);
  ex.example.header = std::move(header);
  for (std::size_t i = 0; i < std::max<std::size_t>(spec.rows, 1); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(pick(pools.fillers, rng));
    ex.example.body.push_back(std::move(row));
  }
  const std::string cls = label == 1 ? (*ex.example.header)[rng.uniform_int(n)]
                                     : pools.classes[c_idx[n]];
  ex.query = cls + " " + pick(pools.fillers, rng);
  return ex;
}

LabeledExample make_caption_match(const SynthSpec& spec, const Pools& pools, int label,
                                  Rng& rng) {
  const std::size_t caption_k = std::min<std::size_t>(3, pools.keywords.size() - 1);
  const auto k_idx = sample_distinct(pools.keywords.size(), caption_k + 1, rng);

  LabeledExample ex;
  ex.label = label;
  std::string caption;
  for (std::size_t i = 0; i < caption_k; ++i) {
    if (i) caption += " ";
    caption += pools.keywords[k_idx[i]];
  }
  ex.example.caption = caption;
  const std::string kw = label == 1 ? pools.keywords[k_idx[rng.uniform_int(caption_k)]]
                                    : pools.keywords[k_idx[caption_k]];
  ex.query = kw + " " + pick(pools.fillers, rng) + " " + pick(pools.fillers, rng);

  const std::size_t r = std::max<std::size_t>(spec.rows, 1);
  if (spec.as_lists) {
    ex.example.kind = TableKind::list;
    for (std::size_t i = 0; i < r; ++i)
      ex.example.body.push_back({pick(pools.fillers, rng) + " " + pick(pools.fillers, rng)});
  } else {
    ex.example.kind = TableKind::table;
    const std::size_t n = std::max<std::size_t>(spec.cols, 1);
    for (std::size_t i = 0; i < r; ++i) {
      std::vector<std::string> row;
      for (std::size_t j = 0; j < n; ++j) row.push_back(pick(pools.fillers, rng));
      ex.example.body.push_back(std::move(row));
    }
  }
  return ex;
}

LabeledExample make_pretrain_table(const SynthSpec& spec, const Pools& pools, Rng& rng) {
  const std::size_t r = std::max<std::size_t>(spec.rows, 2);
  const auto e_idx = sample_distinct(pools.entities.size(), r, rng);

  LabeledExample ex;
  ex.labeled = false;
  ex.query.clear();
  ex.example.kind = TableKind::table;
  ex.example.caption = pick(pools.fillers, rng) + " " + pick(pools.fillers, rng);
  ex.example.header = std::vector<std::string>{"item", "value"};
  for (std::size_t i = 0; i < r; ++i) {
    // entities keep a canonical value most of the time, which gives the
    // masking objectives a learnable co-occurrence signal
    std::string value;
    if (rng.uniform() < spec.value_correlation) {
      value = pools.values[(e_idx[i] * 7 + 3) % pools.values.size()];
    } else {
      value = pick(pools.values, rng);
    }
    ex.example.body.push_back({pools.entities[e_idx[i]], value});
  }
  return ex;
}

}  // namespace

SynthFamily synth_family_from_name(const std::string& name) {
  if (name == "caption") return SynthFamily::caption_match;
  if (name == "header") return SynthFamily::header_class;
  if (name == "rowlookup") return SynthFamily::row_lookup;
  if (name == "pretrain") return SynthFamily::pretrain_tables;
  throw Error("unknown synthetic family: " + name +
              " (expected caption|header|rowlookup|pretrain)");
}

const char* synth_family_name(SynthFamily family) {
  switch (family) {
    case SynthFamily::caption_match: return "caption";
    case SynthFamily::header_class: return "header";
    case SynthFamily::row_lookup: return "rowlookup";
    case SynthFamily::pretrain_tables: return "pretrain";
  }
  return "unknown";
}

std::vector<LabeledExample> generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  const Pools pools = make_pools(spec);
  std::vector<LabeledExample> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    Rng rng(seed, i + 1);
    const int label = static_cast<int>(i % 2);  // exactly balanced
    LabeledExample ex;
    switch (spec.family) {
      case SynthFamily::caption_match: ex = make_caption_match(spec, pools, label, rng); break;
      case SynthFamily::header_class: ex = make_header_class(spec, pools, label, rng); break;
      case SynthFamily::row_lookup: ex = make_row_lookup(spec, pools, label, rng); break;
      case SynthFamily::pretrain_tables: ex = make_pretrain_table(spec, pools, rng); break;
    }
    ex.id = std::string(synth_family_name(spec.family)) + "-" + std::to_string(i);
    ex.example.validate();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace tabgraph
