#include "parachute/catalog.hpp"

#include <nlohmann/json.hpp>

namespace parachute {

std::string_view to_string(ParachuteKind kind) {
  switch (kind) {
  case ParachuteKind::NumericHistogram:
    return "numeric-histogram";
  case ParachuteKind::LowcardString:
    return "lowcard-string";
  case ParachuteKind::StringFingerprint:
    return "string-fingerprint";
  }
  return "?";
}

ParachuteKind parachute_kind_from_string(std::string_view name) {
  if (name == "numeric-histogram" || name == "numeric")
    return ParachuteKind::NumericHistogram;
  if (name == "lowcard-string" || name == "lowcard")
    return ParachuteKind::LowcardString;
  if (name == "string-fingerprint" || name == "fingerprint")
    return ParachuteKind::StringFingerprint;
  throw ParseError("unknown parachute kind '" + std::string(name) + "'");
}

std::string helper_column_name(std::string_view source_column, unsigned pbw) {
  return "parachute_helper_" + std::string(source_column) + "_" + std::to_string(pbw);
}

void Catalog::validate(const ParachuteDescriptor &d) const {
  auto fail = [&](const std::string &why) {
    throw ValidationError("parachute (" + d.fk_table + ", " + d.pk_table + ", " + d.source_column + "): " + why);
  };
  if (d.pbw < 1 || d.pbw > kMaxParachuteWidth)
    fail("pbw must be in [1, 32], got " + std::to_string(d.pbw));
  if (!schema_.has_table(d.fk_table))
    fail("unknown FK table");
  if (!schema_.has_table(d.pk_table))
    fail("unknown PK table");
  if (!schema_.find_fk(d.fk_table, d.fk_column, d.pk_table, d.pk_column))
    fail("no foreign key " + d.fk_table + "." + d.fk_column + " -> " + d.pk_table + "." + d.pk_column);

  if (d.kind == ParachuteKind::StringFingerprint) {
    if (!std::holds_alternative<BytePartition>(d.representation))
      fail("string-fingerprint kind needs a byte partition");
    if (d.partition().clusters() != d.pbw)
      fail("byte partition has " + std::to_string(d.partition().clusters()) + " clusters, pbw is " +
           std::to_string(d.pbw));
  } else {
    if (!d.has_histogram())
      fail("histogram kinds need an equi-depth histogram");
    const auto &h = d.histogram();
    h.check_invariants();
    if (uint64_t{h.bin_count()} > (uint64_t{1} << d.pbw))
      fail("histogram has " + std::to_string(h.bin_count()) + " bins, more than 2^pbw");
    const auto want = d.kind == ParachuteKind::NumericHistogram ? HistogramKind::Numeric : HistogramKind::ValueMap;
    if (h.kind() != want)
      fail("histogram kind does not match parachute kind");
    if (d.nullable_source && !h.null_bin())
      fail("nullable source needs a NULL bin");
  }
  if (d.helper_column && d.kind != ParachuteKind::StringFingerprint)
    fail("only string-fingerprint parachutes have helper columns");

  if (d.via) {
    if (*d.via >= descriptors_.size())
      fail("unknown upstream descriptor " + std::to_string(*d.via));
    const auto &up = descriptors_[*d.via];
    if (up.fk_table != d.pk_table || up.column_name() != d.source_column)
      fail("upstream descriptor does not provide column '" + d.source_column + "' on '" + d.pk_table + "'");
    if (up.kind != d.kind || up.pbw != d.pbw || up.representation != d.representation)
      fail("transitive parachute must share the upstream representation");
    if (d.origin_table != up.origin_table || d.origin_column != up.origin_column)
      fail("transitive parachute origin differs from upstream origin");
  } else {
    const auto &col = schema_.table(d.pk_table).column(d.source_column);
    const auto want = d.kind == ParachuteKind::NumericHistogram ? LogicalType::Int64 : LogicalType::String;
    if (col.type != want)
      fail("source column type does not match kind " + std::string(to_string(d.kind)));
    if (col.nullable && !d.nullable_source)
      fail("source column is nullable");
    if (d.origin_table != d.pk_table || d.origin_column != d.source_column)
      fail("origin must equal the source column for one-hop parachutes");
  }
}

DescriptorId Catalog::register_parachute(ParachuteDescriptor d) {
  validate(d);
  for (auto &existing : descriptors_) {
    if (existing.fk_table == d.fk_table && existing.pk_table == d.pk_table && existing.source_column == d.source_column) {
      d.id = existing.id;
      existing = std::move(d);
      return existing.id;
    }
  }
  d.id = static_cast<DescriptorId>(descriptors_.size());
  descriptors_.push_back(std::move(d));
  return descriptors_.back().id;
}

const ParachuteDescriptor &Catalog::descriptor(DescriptorId id) const {
  if (id >= descriptors_.size())
    throw LookupError("unknown parachute descriptor " + std::to_string(id));
  return descriptors_[id];
}

const ParachuteDescriptor *Catalog::find(std::string_view fk_table, std::string_view pk_table,
                                         std::string_view source_column) const {
  for (const auto &d : descriptors_)
    if (d.fk_table == fk_table && d.pk_table == pk_table && d.source_column == source_column)
      return &d;
  return nullptr;
}

std::vector<const ParachuteDescriptor *> Catalog::find_by_origin(std::string_view fk_table, std::string_view origin_table,
                                                                 std::string_view origin_column) const {
  std::vector<const ParachuteDescriptor *> out;
  for (const auto &d : descriptors_)
    if (!d.via && d.fk_table == fk_table && d.origin_table == origin_table && d.origin_column == origin_column)
      out.push_back(&d);
  return out;
}

std::vector<const ParachuteDescriptor *> Catalog::on_table(std::string_view fk_table) const {
  std::vector<const ParachuteDescriptor *> out;
  for (const auto &d : descriptors_)
    if (d.fk_table == fk_table)
      out.push_back(&d);
  return out;
}

std::vector<const ParachuteDescriptor *> Catalog::referencing(std::string_view pk_table) const {
  std::vector<const ParachuteDescriptor *> out;
  for (const auto &d : descriptors_)
    if (d.pk_table == pk_table)
      out.push_back(&d);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json &j, const ParachuteDescriptor &d) {
  j = nlohmann::json{{"id", d.id},
                     {"fk_table", d.fk_table},
                     {"fk_column", d.fk_column},
                     {"pk_table", d.pk_table},
                     {"pk_column", d.pk_column},
                     {"source_column", d.source_column},
                     {"pbw", d.pbw},
                     {"kind", std::string(to_string(d.kind))},
                     {"nullable_source", d.nullable_source},
                     {"relaxed", d.relaxed},
                     {"origin_table", d.origin_table},
                     {"origin_column", d.origin_column},
                     {"column", d.column_name()}};
  j["helper_column"] = d.helper_column ? nlohmann::json(*d.helper_column) : nlohmann::json(nullptr);
  j["via"] = d.via ? nlohmann::json(*d.via) : nlohmann::json(nullptr);
  if (d.has_histogram())
    j["histogram"] = d.histogram();
  else
    j["partition"] = d.partition();
}

ParachuteDescriptor descriptor_from_json(const nlohmann::json &j) {
  try {
    ParachuteDescriptor d;
    d.id = j.at("id").get<DescriptorId>();
    d.fk_table = j.at("fk_table").get<std::string>();
    d.fk_column = j.at("fk_column").get<std::string>();
    d.pk_table = j.at("pk_table").get<std::string>();
    d.pk_column = j.at("pk_column").get<std::string>();
    d.source_column = j.at("source_column").get<std::string>();
    d.pbw = j.at("pbw").get<unsigned>();
    d.kind = parachute_kind_from_string(j.at("kind").get<std::string>());
    d.nullable_source = j.value("nullable_source", false);
    d.relaxed = j.value("relaxed", false);
    d.origin_table = j.at("origin_table").get<std::string>();
    d.origin_column = j.at("origin_column").get<std::string>();
    if (j.contains("helper_column") && !j["helper_column"].is_null())
      d.helper_column = j["helper_column"].get<std::string>();
    if (j.contains("via") && !j["via"].is_null())
      d.via = j["via"].get<DescriptorId>();
    if (j.contains("histogram"))
      d.representation = histogram_from_json(j["histogram"]);
    else
      d.representation = partition_from_json(j.at("partition"), d.pbw);
    return d;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid descriptor JSON: ") + e.what());
  }
}

void to_json(nlohmann::json &j, const Catalog &c) {
  j = nlohmann::json::object();
  j["schema"] = c.schema();
  j["null_bin"] = 0;
  auto &descs = j["descriptors"] = nlohmann::json::array();
  for (const auto &d : c.descriptors())
    descs.push_back(d);
  auto &pending = j["pending"] = nlohmann::json::array();
  for (const auto &[id, keys] : c.pending())
    if (!keys.empty())
      pending.push_back({{"descriptor", id}, {"keys", keys}});
}

Catalog catalog_from_json(const nlohmann::json &j) {
  try {
    Catalog c(schema_from_json(j.at("schema")));
    if (j.contains("descriptors"))
      for (const auto &jd : j["descriptors"]) {
        auto d = descriptor_from_json(jd);
        const auto expected = static_cast<DescriptorId>(c.descriptors().size());
        if (d.id != expected)
          throw ParseError("descriptor ids must be dense, expected " + std::to_string(expected));
        c.register_parachute(std::move(d));
      }
    if (j.contains("pending"))
      for (const auto &jp : j["pending"])
        c.pending()[jp.at("descriptor").get<DescriptorId>()] = jp.at("keys").get<std::set<int64_t>>();
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid catalog JSON: ") + e.what());
  }
}

} // namespace parachute
