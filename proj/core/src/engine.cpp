#include "oblivgm/engine.hpp"

#include <algorithm>

#include "oblivgm/errors.hpp"
#include "oblivgm/fss.hpp"
#include "oblivgm/shuffle.hpp"

namespace oblivgm {

namespace {

SharedBitVector empty_share(int party) { return SharedBitVector::zeros(party, 0); }

SharedBitVector concat(const SharedBitVector& id, const std::vector<SharedBitVector>& attrs) {
  SharedBitVector row = id;
  for (const auto& a : attrs) row.append(a);
  return row;
}

MatchedSlot split_record(const SharedBitVector& row, std::size_t id_width, const std::vector<std::size_t>& attr_widths,
                         std::optional<std::size_t> parent) {
  MatchedSlot s;
  s.parent_slot = parent;
  s.id = row.slice(0, id_width);
  std::size_t off = id_width;
  for (auto w : attr_widths) {
    s.attrs.push_back(row.slice(off, w));
    off += w;
  }
  return s;
}

void report(const EngineOptions& opt, const std::string& line) {
  if (opt.progress) opt.progress(line);
}

}  // namespace

std::vector<std::uint32_t> needed_attributes(const TokenVertex& v) {
  std::vector<std::uint32_t> out;
  for (const auto& p : v.predicates)
    if (std::find(out.begin(), out.end(), p.attr_index) == out.end()) out.push_back(p.attr_index);
  return out;
}

SharedBitVector sec_eval(Party& party, const std::vector<const SharedBitVector*>& attrs, const TokenPredicate& pred) {
  PhaseScope phase(party, "eval");
  const std::size_t n = pred.domain_size;
  for (const auto* a : attrs)
    if (a->size() != n) throw ValidationError("candidate attribute width does not match the key domain");
  const auto first = fss::component_masks(pred.first, n);
  const auto second = fss::component_masks(pred.second, n);
  if (first.size() != second.size()) throw ValidationError("token keys of one predicate disagree in kind");

  SharedBitVector result = SharedBitVector::zeros(party.index(), attrs.size());
  for (std::size_t k = 0; k < first.size(); ++k) {
    BitVector local(attrs.size());
    for (std::size_t c = 0; c < attrs.size(); ++c)
      if (and_parity(first[k], attrs[c]->a) != and_parity(second[k], attrs[c]->b)) local.set(c, true);
    result = xor_local(result, party.reshare(local));
  }
  return result;
}

SharedBitVector combine_predicates(Party& party, std::vector<SharedBitVector> bits, Combiner combiner, AnyMode mode) {
  if (bits.empty()) throw ValidationError("no predicate bits to combine");
  PhaseScope phase(party, "combine");
  SharedBitVector acc = std::move(bits.front());
  for (std::size_t i = 1; i < bits.size(); ++i) {
    if (combiner == Combiner::All) {
      acc = party.and_gate(acc, bits[i]);
    } else if (mode == AnyMode::Xor) {
      acc = xor_local(acc, bits[i]);
    } else {
      auto both = party.and_gate(acc, bits[i]);
      acc = xor_local(xor_local(acc, bits[i]), both);
    }
  }
  return acc;
}

std::vector<SharedBitVector> sec_fetch_unique(
    Party& party, const std::vector<std::pair<SharedBitVector, std::vector<SharedBitVector>>>& groups) {
  PhaseScope phase(party, "fetch");
  std::vector<BitVector> local;
  for (const auto& [bits, records] : groups) {
    if (records.empty() || bits.size() != records.size())
      throw ValidationError("unique fetch needs one bit per record and at least one record");
    BitVector acc(records.front().size());
    for (std::size_t c = 0; c < records.size(); ++c)
      accumulate_scaled(acc, bits.a.get(c), bits.b.get(c), records[c].a, records[c].b);
    local.push_back(std::move(acc));
  }
  if (local.empty()) return {};
  return party.reshare_many(local);
}

std::vector<std::vector<SharedBitVector>> sec_fetch_multi(
    Party& party, const std::vector<std::pair<SharedBitVector, std::vector<SharedBitVector>>>& groups) {
  PhaseScope phase(party, "fetch");
  std::vector<MatchTable> tables;
  for (const auto& [bits, records] : groups) {
    if (bits.size() != records.size()) throw ValidationError("multi fetch needs one bit per record");
    MatchTable t;
    for (std::size_t c = 0; c < records.size(); ++c) {
      auto row = bits.bit(c);
      row.append(records[c]);
      t.rows.push_back(std::move(row));
    }
    tables.push_back(std::move(t));
  }
  std::vector<std::vector<SharedBitVector>> out(groups.size());
  std::size_t total = 0;
  for (const auto& t : tables) total += t.size();
  if (total == 0) return out;

  tables = sec_shuffle(party, std::move(tables));
  auto flags = empty_share(party.index());
  for (const auto& t : tables)
    for (const auto& r : t.rows) flags.append(r.bit(0));
  const auto opened = party.open(flags);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < tables.size(); ++g) {
    for (const auto& r : tables[g].rows) {
      if (opened.get(pos++)) out[g].push_back(r.slice(1, r.size() - 1));
    }
  }
  return out;
}

std::vector<CandidateSet> sec_access(Party& party, const EncryptedGraphShare& graph,
                                     const std::vector<SharedBitVector>& matched_ids, std::size_t parent_type,
                                     std::size_t neighbor_type, const std::vector<std::uint32_t>& neighbor_attrs) {
  PhaseScope phase(party, "access");
  const auto& schema = graph.schema;
  if (parent_type >= schema.types.size() || neighbor_type >= schema.types.size())
    throw ValidationError("unknown vertex type in neighbour access");
  const auto& nt = schema.types[neighbor_type];
  for (auto a : neighbor_attrs)
    if (a >= nt.attributes.size()) throw ValidationError("unknown attribute type in neighbour access");
  const std::size_t parents = schema.types[parent_type].population;
  const std::size_t width = nt.population;
  const std::size_t lmax = graph.max_posting_length(parent_type, neighbor_type);

  std::vector<CandidateSet> out(matched_ids.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m].parent_slot = m;
  if (matched_ids.empty() || lmax == 0) return out;

  // Posting list of each matched vertex by one-hot selection over all lists.
  std::vector<BitVector> local(matched_ids.size() * lmax, BitVector(width));
  for (std::size_t m = 0; m < matched_ids.size(); ++m) {
    const auto& id = matched_ids[m];
    if (id.size() != parents) throw ValidationError("matched ID width does not match the parent population");
    for (std::size_t c = 0; c < parents; ++c) {
      const bool xa = id.a.get(c), xb = id.b.get(c);
      if (!xa && !xb) continue;
      const auto& list = graph.vertices[parent_type][c].postings[neighbor_type];
      for (std::size_t l = 0; l < list.size(); ++l) accumulate_scaled(local[m * lmax + l], xa, xb, list[l].a, list[l].b);
    }
  }
  auto fetched = party.reshare_many(local);
  local.clear();

  std::vector<MatchTable> tables(matched_ids.size());
  for (std::size_t i = 0; i < fetched.size(); ++i) tables[i / lmax].rows.push_back(std::move(fetched[i]));
  tables = sec_shuffle(party, std::move(tables));

  // Dummy entries are all-zero, so the parity of an ID marks a real neighbour.
  auto flags = empty_share(party.index());
  for (const auto& t : tables)
    for (const auto& r : t.rows) flags.append(r.parity());
  const auto opened = party.open(flags);

  std::vector<std::pair<std::size_t, const SharedBitVector*>> valid;
  std::size_t pos = 0;
  for (std::size_t m = 0; m < tables.size(); ++m)
    for (const auto& r : tables[m].rows)
      if (opened.get(pos++)) valid.emplace_back(m, &r);

  std::vector<BitVector> attr_local;
  for (const auto& [m, row] : valid) {
    for (auto a : neighbor_attrs) {
      BitVector acc(nt.attributes[a].size());
      for (std::size_t x = 0; x < width; ++x) {
        const auto& d = graph.vertices[neighbor_type][x].attrs[a];
        accumulate_scaled(acc, row->a.get(x), row->b.get(x), d.a, d.b);
      }
      attr_local.push_back(std::move(acc));
    }
  }
  std::vector<SharedBitVector> attrs;
  if (!attr_local.empty()) attrs = party.reshare_many(attr_local);

  std::size_t k = 0;
  for (const auto& [m, row] : valid) {
    out[m].ids.push_back(*row);
    auto& per = out[m].attrs.emplace_back();
    for (std::size_t j = 0; j < neighbor_attrs.size(); ++j) per.push_back(std::move(attrs[k++]));
  }
  return out;
}

std::vector<std::vector<std::size_t>> assemble_subgraphs(const PartyToken& token,
                                                         const std::vector<std::vector<MatchedSlot>>& slots) {
  const auto n = token.vertices.size();
  using Partial = std::vector<std::size_t>;
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  // subtrees[v][s]: every assignment of v's subtree rooted at slot s.
  std::vector<std::vector<std::vector<Partial>>> subtrees(n);
  auto order = token.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = *it;
    subtrees[v].resize(slots[v].size());
    const auto kids = token.children(v);
    for (std::size_t s = 0; s < slots[v].size(); ++s) {
      Partial base(n, kUnset);
      base[v] = s;
      std::vector<Partial> acc{base};
      for (auto u : kids) {
        std::vector<Partial> options;
        for (std::size_t su = 0; su < slots[u].size(); ++su)
          if (slots[u][su].parent_slot == s)
            options.insert(options.end(), subtrees[u][su].begin(), subtrees[u][su].end());
        std::vector<Partial> next;
        for (const auto& a : acc) {
          for (const auto& o : options) {
            Partial merged = a;
            for (std::size_t i = 0; i < n; ++i)
              if (o[i] != kUnset) merged[i] = o[i];
            next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
        if (acc.empty()) break;
      }
      subtrees[v][s] = std::move(acc);
    }
  }
  std::vector<Partial> out;
  for (auto& st : subtrees[token.root])
    for (auto& p : st) out.push_back(std::move(p));
  return out;
}

MatchResultSet sec_match(Party& party, const PartyToken& token, const EncryptedGraphShare& graph,
                         const EngineOptions& options) {
  const auto& schema = graph.schema;
  if (token.party != party.index() || graph.party != party.index())
    throw ValidationError("token, graph share and party index disagree");
  if (token.schema_id != schema_fingerprint(schema)) throw ValidationError("token was generated for another schema");
  for (const auto& v : token.vertices) {
    if (v.type_index >= schema.types.size()) throw ValidationError("token names an unknown vertex type");
    for (const auto& p : v.predicates) {
      if (p.attr_index >= schema.types[v.type_index].attributes.size())
        throw ValidationError("token names an unknown attribute");
      if (p.domain_size != schema.types[v.type_index].attributes[p.attr_index].size())
        throw ValidationError("token key domain does not match the dictionary");
    }
  }
  if (token.root >= token.vertices.size()) throw ValidationError("token root out of range");

  const auto n = token.vertices.size();
  MatchResultSet result;
  result.slots.resize(n);
  std::vector<std::vector<CandidateSet>> pending(n);

  {
    const auto& root = token.vertices[token.root];
    const auto needed = needed_attributes(root);
    CandidateSet all;
    for (const auto& v : graph.vertices[root.type_index]) {
      all.ids.push_back(v.id);
      auto& attrs = all.attrs.emplace_back();
      for (auto a : needed) attrs.push_back(v.attrs[a]);
    }
    pending[token.root].push_back(std::move(all));
  }

  for (auto v : token.bfs_order()) {
    const auto& tv = token.vertices[v];
    const auto& type = schema.types[tv.type_index];
    const auto needed = needed_attributes(tv);
    std::vector<std::size_t> widths;
    for (auto a : needed) widths.push_back(type.attributes[a].size());
    auto& groups = pending[v];

    std::size_t total = 0;
    for (const auto& g : groups) total += g.size();
    HopTrace hop{v, total, 0, tv.unique_fetch};

    if (total > 0) {
      std::vector<SharedBitVector> bits;
      for (const auto& p : tv.predicates) {
        const auto k = static_cast<std::size_t>(std::find(needed.begin(), needed.end(), p.attr_index) - needed.begin());
        std::vector<const SharedBitVector*> attrs;
        attrs.reserve(total);
        for (const auto& g : groups)
          for (const auto& c : g.attrs) attrs.push_back(&c[k]);
        bits.push_back(sec_eval(party, attrs, p));
      }
      auto combined = combine_predicates(party, std::move(bits), tv.combiner, options.any_mode);

      std::vector<std::pair<SharedBitVector, std::vector<SharedBitVector>>> batches;
      std::vector<std::optional<std::size_t>> parents;
      std::size_t off = 0;
      for (auto& g : groups) {
        if (g.size() == 0) continue;
        std::vector<SharedBitVector> records;
        for (std::size_t c = 0; c < g.size(); ++c) records.push_back(concat(g.ids[c], g.attrs[c]));
        batches.emplace_back(combined.slice(off, g.size()), std::move(records));
        parents.push_back(g.parent_slot);
        off += g.size();
      }
      groups.clear();

      auto& slots = result.slots[v];
      if (tv.unique_fetch) {
        auto rows = sec_fetch_unique(party, batches);
        for (std::size_t g = 0; g < rows.size(); ++g)
          slots.push_back(split_record(rows[g], type.population, widths, parents[g]));
      } else {
        auto kept = sec_fetch_multi(party, batches);
        for (std::size_t g = 0; g < kept.size(); ++g)
          for (const auto& r : kept[g]) slots.push_back(split_record(r, type.population, widths, parents[g]));
      }
      hop.matched = slots.size();
    }
    result.trace.push_back(hop);
    report(options, "[party-" + std::to_string(party.index()) + "] vertex " + tv.name + ": " +
                        std::to_string(hop.candidates) + " candidates, " + std::to_string(hop.matched) +
                        (tv.unique_fetch ? " fetched slots" : " matched"));

    for (auto u : token.children(v)) {
      const auto& tu = token.vertices[u];
      std::vector<SharedBitVector> ids;
      for (const auto& s : result.slots[v]) ids.push_back(s.id);
      auto sets = sec_access(party, graph, ids, tv.type_index, tu.type_index, needed_attributes(tu));
      for (auto& s : sets) pending[u].push_back(std::move(s));
    }
  }

  result.subgraphs = assemble_subgraphs(token, result.slots);
  return result;
}

}  // namespace oblivgm
