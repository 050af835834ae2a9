#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bemflow::idd {

enum class FieldKind { Alpha, Numeric, Integer, Choice, ObjectListRef, Node };

struct Bounds {
    std::optional<double> min;
    std::optional<double> max;
    bool min_exclusive = false;
    bool max_exclusive = false;

    bool contains(double v) const;
    bool operator==(const Bounds&) const = default;
};

/// One field of an IDD object class, in declaration order.
struct FieldDef {
    int ordinal = 0;  // 1-based position
    std::string field_id;  // spec token, e.g. "A1" or "N3"
    std::string name;      // display name, e.g. "Number of People"
    FieldKind kind = FieldKind::Alpha;
    bool required = false;
    std::optional<std::string> default_value;
    std::vector<std::string> choices;          // \key entries, kind == Choice
    std::optional<Bounds> bounds;              // numeric/integer only
    std::optional<std::string> units;
    bool autosize_allowed = false;
    bool autocalculate_allowed = false;
    std::vector<std::string> referenced_lists;  // \object-list: value must name a member
    std::vector<std::string> reference_lists;   // \reference: this field's value registers here
    std::vector<std::string> notes;
    std::vector<std::string> other_directives;  // unknown directives, kept verbatim

    bool operator==(const FieldDef&) const = default;
};

struct ObjectDef {
    std::string class_name;
    std::vector<std::string> memo;
    int min_fields = 0;
    std::vector<FieldDef> fields;
    std::optional<int> extensible_group;  // repeating tail-group size
    std::vector<std::string> other_directives;

    const FieldDef* find_field(std::string_view display_name) const;

    /// Field definition governing 1-based position `ordinal`, mapping
    /// positions past the declared list into the extensible tail group.
    /// Returns nullptr when the position is out of range for a
    /// non-extensible class.
    const FieldDef* field_at(int ordinal) const;

    /// Display name for position `ordinal`; extensible tail fields get a
    /// group-relative index (Field 1, Field 2, ...).
    std::string display_name_at(int ordinal) const;

    bool operator==(const ObjectDef&) const = default;
};

struct ObjectListEntry {
    std::string class_name;
    int name_field_ordinal = 0;
    bool operator==(const ObjectListEntry&) const = default;
};

struct IddSchema {
    std::string version;
    std::map<std::string, ObjectDef> defs;  // key: normalized class name
    std::map<std::string, std::vector<ObjectListEntry>> object_lists;
    std::vector<std::string> unresolved_lists;  // \object-list names never declared
    std::vector<std::string> warnings;

    const ObjectDef* find(std::string_view class_name) const;
    bool has(std::string_view class_name) const { return find(class_name) != nullptr; }
};

enum class IddErrorKind { EmptyInput, MalformedHeader, DanglingDirective, UnknownClass };

class IddError : public std::runtime_error {
public:
    IddError(IddErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    IddErrorKind kind() const { return kind_; }

private:
    IddErrorKind kind_;
};

class UnknownClassError : public IddError {
public:
    UnknownClassError(std::string class_name, std::string suggestion);
    const std::string& class_name() const { return class_name_; }
    /// Nearest declared class by edit distance; empty when schema is empty.
    const std::string& suggestion() const { return suggestion_; }

private:
    std::string class_name_;
    std::string suggestion_;
};

/// Parse IDD grammar text into a schema. Unknown directives are retained as
/// opaque annotations; duplicate class definitions keep the last one and
/// record a warning.
IddSchema parse_idd(std::string_view source_text);

/// Case-insensitive lookup; throws UnknownClassError with a nearest-name
/// suggestion when the class is absent.
const ObjectDef& object_def(const IddSchema& schema, std::string_view class_name);

/// Serialize one class back to IDD syntax, suitable for embedding in a
/// generation prompt. parse_idd(idd_excerpt(s, c)) yields an equivalent def.
std::string idd_excerpt(const IddSchema& schema, std::string_view class_name);

std::string serialize_object_def(const ObjectDef& def);

}  // namespace bemflow::idd
