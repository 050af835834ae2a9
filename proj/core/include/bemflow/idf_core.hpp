#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bemflow/idd_schema.hpp"

namespace bemflow::idf {

/// A single field value. Values matching the TBD placeholder pattern are
/// classified Placeholder at parse time.
struct FieldValue {
    enum class Kind { Blank, Literal, Placeholder };

    Kind kind = Kind::Blank;
    std::string text;     // literal text or placeholder token
    std::string comment;  // the "!-" annotation, without the marker

    static FieldValue blank() { return FieldValue{}; }
    static FieldValue literal(std::string value);
    static FieldValue placeholder(std::string token);
    /// Classify by content: empty -> Blank, ^TBD[0-9]{10}$ -> Placeholder.
    static FieldValue classify(std::string value);
    static bool is_placeholder_token(std::string_view s);

    bool is_blank() const { return kind == Kind::Blank; }
    bool operator==(const FieldValue& o) const { return kind == o.kind && text == o.text; }
};

struct IdfObject {
    std::string class_name;
    std::vector<FieldValue> values;
    std::optional<std::pair<int, int>> source_span;  // 1-based line range

    /// First field's literal text; the conventional object name for classes
    /// whose first field is a Name.
    std::string name_or_empty() const;
};

struct IdfDocument {
    std::vector<IdfObject> objects;
    std::vector<std::string> leading_comments;

    /// Indices of objects matching class (and name, when non-empty),
    /// case-insensitively.
    std::vector<std::size_t> find(std::string_view class_name,
                                  std::string_view object_name = {}) const;
};

struct DanglingReference {
    std::size_t object_index = 0;
    int field_ordinal = 0;  // 1-based
    std::string referenced_name;
    std::string expected_list;  // '|'-joined when the field accepts several
};

struct PlaceholderEntry {
    std::size_t object_index = 0;
    int field_ordinal = 0;
    std::string token;
};

struct ReferenceAudit {
    std::vector<DanglingReference> dangling;
    std::vector<PlaceholderEntry> placeholders;
    std::vector<std::string> warnings;  // e.g. classes absent from the schema

    bool clean() const { return dangling.empty() && placeholders.empty(); }
};

enum class IdfErrorKind { UnterminatedObject, StrayText, TargetNotFound, AmbiguousTarget };

class IdfError : public std::runtime_error {
public:
    IdfError(IdfErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    IdfErrorKind kind() const { return kind_; }

private:
    IdfErrorKind kind_;
};

IdfDocument parse_idf(std::string_view source_text);

/// Serialize with source comments preserved. One field per line, aligned
/// "!-" comments, trailing semicolon on the last field.
std::string serialize(const IdfDocument& doc);
/// Serialize with canonical comments: the schema's field display names win
/// over whatever the source carried.
std::string serialize(const IdfDocument& doc, const idd::IddSchema& schema);

std::string serialize_object(const IdfObject& object);
std::string serialize_object(const IdfObject& object, const idd::IddSchema& schema);

struct MergeResult {
    IdfDocument document;
    std::vector<std::string> warnings;  // duplicate (class, name) pairs
};

/// Append additions in input order; base objects preserved byte-for-byte.
MergeResult merge(IdfDocument base, std::vector<IdfObject> additions);

struct Repair {
    std::string class_name;
    std::string object_name;
    IdfObject replacement;
};

/// Replace exactly the named objects; throws TargetNotFound / AmbiguousTarget.
IdfDocument replace_objects(const IdfDocument& doc, const std::vector<Repair>& repairs);

/// Check every object-list reference field against the objects actually
/// present; placeholders are reported separately, never as dangling.
ReferenceAudit reference_audit(const IdfDocument& doc, const idd::IddSchema& schema);

}  // namespace bemflow::idf
