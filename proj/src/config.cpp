#include "adiabatic/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "adiabatic/models.hpp"

namespace adiabatic::config {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool bare_key(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

// Removes a trailing comment, respecting string literals.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string && c == '\\') {
            ++i;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

// Net '[' minus ']' outside strings.
int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string && c == '\\') {
            ++i;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (!in_string && c == '[') {
            ++depth;
        } else if (!in_string && c == ']') {
            --depth;
        }
    }
    return depth;
}

class ValueParser {
public:
    explicit ValueParser(const std::string& text) : s_(text) {}

    Value::Scalar scalar() {
        skip_ws();
        if (pos_ >= s_.size()) throw std::invalid_argument("missing value");
        if (s_[pos_] == '"') return string();
        const auto start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && !std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        const std::string token = s_.substr(start, pos_ - start);
        if (token == "true") return true;
        if (token == "false") return false;
        return number(token);
    }

    Value value() {
        Value v;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '[') {
            ++pos_;
            std::vector<Value::Scalar> items;
            for (;;) {
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                if (pos_ < s_.size() && s_[pos_] == '[') throw std::invalid_argument("nested arrays are not supported");
                items.push_back(scalar());
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') {
                    ++pos_;
                } else if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    break;
                } else {
                    throw std::invalid_argument("expected ',' or ']' in array");
                }
            }
            v.data = std::move(items);
        } else {
            std::visit([&](auto&& x) { v.data = x; }, scalar());
        }
        skip_ws();
        if (pos_ != s_.size()) throw std::invalid_argument("unexpected text after value: '" + s_.substr(pos_) + "'");
        return v;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) break;
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: throw std::invalid_argument(std::string("unsupported escape \\") + e);
                }
            }
            out += c;
        }
        if (pos_ >= s_.size()) throw std::invalid_argument("unterminated string");
        ++pos_;
        return out;
    }

    static Value::Scalar number(std::string token) {
        if (token.empty()) throw std::invalid_argument("missing value");
        // Underscores are allowed between digits.
        for (std::size_t i = 0; i < token.size(); ++i) {
            if (token[i] != '_') continue;
            if (i == 0 || i + 1 == token.size() || !std::isdigit(static_cast<unsigned char>(token[i - 1])) ||
                !std::isdigit(static_cast<unsigned char>(token[i + 1])))
                throw std::invalid_argument("misplaced '_' in number '" + token + "'");
        }
        token.erase(std::remove(token.begin(), token.end(), '_'), token.end());
        const char* first = token.data() + (token[0] == '+' ? 1 : 0);
        const char* last = token.data() + token.size();
        if (token.find_first_of(".eE") == std::string::npos) {
            std::int64_t i = 0;
            const auto r = std::from_chars(first, last, i);
            if (r.ec == std::errc() && r.ptr == last) return i;
        } else {
            double d = 0.0;
            const auto r = std::from_chars(first, last, d);
            if (r.ec == std::errc() && r.ptr == last) return d;
        }
        throw std::invalid_argument("cannot parse value '" + token + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), x);
    std::string s(buf, r.ptr);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

std::string type_name(const Value& v) {
    switch (v.data.index()) {
        case 0: return "boolean";
        case 1: return "integer";
        case 2: return "float";
        case 3: return "string";
        default: return "array";
    }
}

// Typed accessors; each reports into `errors` and returns nullopt on mismatch.
struct Reader {
    std::vector<std::string>& errors;

    void fail(const std::string& key, const Value& v, const std::string& what) {
        std::ostringstream msg;
        msg << key << " (line " << v.line << "): " << what;
        errors.push_back(msg.str());
    }

    static std::optional<double> scalar_number(const Value::Scalar& s) {
        if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&s)) return *d;
        return std::nullopt;
    }

    std::optional<double> number(const std::string& key, const Value& v) {
        if (const auto* i = std::get_if<std::int64_t>(&v.data)) return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&v.data)) {
            if (!std::isfinite(*d)) {
                fail(key, v, "must be finite");
                return std::nullopt;
            }
            return *d;
        }
        fail(key, v, "expected a number, got " + type_name(v));
        return std::nullopt;
    }

    std::optional<long> integer(const std::string& key, const Value& v) {
        if (const auto* i = std::get_if<std::int64_t>(&v.data)) return static_cast<long>(*i);
        fail(key, v, "expected an integer, got " + type_name(v));
        return std::nullopt;
    }

    std::optional<std::string> string(const std::string& key, const Value& v) {
        if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
        fail(key, v, "expected a string, got " + type_name(v));
        return std::nullopt;
    }

    std::optional<std::vector<double>> numbers(const std::string& key, const Value& v) {
        const auto* a = std::get_if<std::vector<Value::Scalar>>(&v.data);
        if (!a) {
            fail(key, v, "expected an array of numbers, got " + type_name(v));
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& s : *a) {
            const auto d = scalar_number(s);
            if (!d || !std::isfinite(*d)) {
                fail(key, v, "array entries must be finite numbers");
                return std::nullopt;
            }
            out.push_back(*d);
        }
        return out;
    }

    std::optional<std::vector<int>> integers(const std::string& key, const Value& v) {
        const auto* a = std::get_if<std::vector<Value::Scalar>>(&v.data);
        if (!a) {
            fail(key, v, "expected an array of integers, got " + type_name(v));
            return std::nullopt;
        }
        std::vector<int> out;
        for (const auto& s : *a) {
            const auto* i = std::get_if<std::int64_t>(&s);
            if (!i) {
                fail(key, v, "array entries must be integers");
                return std::nullopt;
            }
            out.push_back(static_cast<int>(*i));
        }
        return out;
    }
};

using Handler = std::function<void(const std::string& key, const Value& v, Reader& r, ExperimentConfig& c)>;

const std::map<std::string, std::map<std::string, Handler>>& schema() {
    static const std::map<std::string, std::map<std::string, Handler>> s = {
        {"run",
         {
             {"operation",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) {
                      if (auto op = operation_from_string(*s)) {
                          c.operation = op;
                      } else {
                          std::string list;
                          for (const auto& n : operation_names()) list += " " + n;
                          r.fail(k, v, "unknown operation '" + *s + "'; expected one of" + list);
                      }
                  }
              }},
             {"epsilon",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.epsilons = {*d};
              }},
             {"epsilons",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto a = r.numbers(k, v)) c.epsilons = *a;
              }},
             {"from",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto i = r.integer(k, v)) c.from_label = static_cast<int>(*i);
              }},
             {"to",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto i = r.integer(k, v)) c.to_label = static_cast<int>(*i);
              }},
             {"window",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto a = r.numbers(k, v)) {
                      if (a->size() != 2)
                          r.fail(k, v, "expected [t0, t1]");
                      else
                          c.window = std::make_pair((*a)[0], (*a)[1]);
                  }
              }},
             {"samples",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto i = r.integer(k, v)) c.samples = static_cast<int>(*i);
              }},
         }},
        {"crossing",
         {
             {"pair",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto a = r.integers(k, v)) {
                      if (a->size() != 2)
                          r.fail(k, v, "expected [j, k]");
                      else
                          c.pair = {(*a)[0], (*a)[1]};
                  }
              }},
             {"reach",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.reach = *d;
              }},
             {"seed",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto a = r.numbers(k, v)) {
                      if (a->size() != 2)
                          r.fail(k, v, "expected [re, im]");
                      else
                          c.seed = cplx((*a)[0], (*a)[1]);
                  }
              }},
         }},
        {"loop",
         {
             {"label",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto i = r.integer(k, v)) c.loop_label = static_cast<int>(*i);
              }},
             {"half_width",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.loop_half_width = *d;
              }},
             {"margin",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.loop_margin = *d;
              }},
         }},
        {"dissipativity",
         {
             {"path",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) c.path = *s;
              }},
             {"height",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.path_height = *d;
              }},
             {"reach",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.path_reach = *d;
              }},
         }},
        {"superadiabatic",
         {
             {"mode",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) c.sa_mode = *s;
              }},
             {"orders",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto a = r.integers(k, v)) c.orders = *a;
              }},
             {"q_max",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto i = r.integer(k, v)) c.q_max = static_cast<int>(*i);
              }},
             {"criterion",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) c.criterion = *s;
              }},
             {"spacing",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.spacing = *d;
              }},
         }},
        {"tolerances",
         {
             {"integrator",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.integrator_tolerance = *d;
              }},
             {"truncation",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.truncation_tolerance = *d;
              }},
             {"quadrature",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.quadrature_tolerance = *d;
              }},
             {"max_steps",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto i = r.integer(k, v)) c.max_steps = *i;
              }},
         }},
        {"fit",
         {
             {"input",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) c.fit_input = *s;
              }},
             {"column",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) c.fit_column = *s;
              }},
             {"noise_floor",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto d = r.number(k, v)) c.noise_floor = *d;
              }},
         }},
        {"output",
         {
             {"path",
              [](const std::string& k, const Value& v, Reader& r, ExperimentConfig& c) {
                  if (auto s = r.string(k, v)) c.output = *s;
              }},
         }},
    };
    return s;
}

void check_ranges(ExperimentConfig& c, std::vector<std::string>& errors) {
    auto err = [&](const std::string& m) { errors.push_back(m); };

    int dim = 0;
    try {
        auto p = models::parameter_defaults(c.model);
        for (const auto& [key, value] : c.params) {
            if (!p.count(key)) {
                std::string list;
                for (const auto& [name, d] : p) list += " " + name;
                err("model." + key + ": unknown parameter for " + c.model + "; accepted:" + list);
            }
        }
        for (const auto& [key, value] : c.params) p[key] = value;
        c.params = p;
        try {
            dim = models::by_name(c.model, c.params).dimension;
        } catch (const Error& e) {
            err(std::string("model: ") + e.what());
        }
    } catch (const DomainError& e) {
        err(std::string("model.name: ") + e.what());
    }

    if (c.epsilons.empty()) err("run.epsilons: empty epsilon grid");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        if (!(c.epsilons[i] > 0.0)) {
            std::ostringstream msg;
            msg << "run.epsilons[" << i << "] = " << c.epsilons[i] << ": epsilon must be positive";
            err(msg.str());
        }
    }
    if (c.epsilons.size() > 1) {
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < c.epsilons.size(); ++i) {
            inc = inc && c.epsilons[i] > c.epsilons[i - 1];
            dec = dec && c.epsilons[i] < c.epsilons[i - 1];
        }
        if (!inc && !dec) err("run.epsilons: grid must be strictly increasing or strictly decreasing");
    }
    auto label_ok = [&](int label) { return label >= 1 && (dim == 0 || label <= dim); };
    if (!label_ok(c.from_label)) err("run.from: label out of range 1.." + std::to_string(dim));
    if (c.to_label != 0 && !label_ok(c.to_label)) err("run.to: label out of range 1.." + std::to_string(dim));
    if (c.to_label != 0 && c.to_label == c.from_label) err("run.to: must differ from run.from");
    if (c.window && !(c.window->first < c.window->second)) err("run.window: need t0 < t1");
    if (c.samples < 2) err("run.samples: need at least 2");

    if (!label_ok(c.pair.first) || !label_ok(c.pair.second) || c.pair.first == c.pair.second)
        err("crossing.pair: need two distinct labels in range");
    if (!(c.reach > 0.0)) err("crossing.reach: must be positive");
    if (c.seed && !(c.seed->imag() > 0.0)) err("crossing.seed: seed must lie in the upper half plane");

    if (!label_ok(c.loop_label)) err("loop.label: label out of range");
    if (!(c.loop_half_width > 0.0)) err("loop.half_width: must be positive");
    if (!(c.loop_margin > 0.0)) err("loop.margin: must be positive");

    if (c.path != "level_line" && c.path != "straight")
        err("dissipativity.path: expected \"level_line\" or \"straight\", got \"" + c.path + "\"");
    if (!(c.path_reach > 0.0)) err("dissipativity.reach: must be positive");

    static const std::set<std::string> modes{"transition", "truncation", "intertwining", "effective"};
    if (!modes.count(c.sa_mode))
        err("superadiabatic.mode: expected transition, truncation, intertwining or effective, got \"" + c.sa_mode +
            "\"");
    if (c.orders.empty()) err("superadiabatic.orders: must not be empty");
    for (int q : c.orders)
        if (q < 0) err("superadiabatic.orders: orders must be >= 0");
    if (c.q_max < 1) err("superadiabatic.q_max: must be >= 1");
    if (c.criterion != "defect" && c.criterion != "transition")
        err("superadiabatic.criterion: expected \"defect\" or \"transition\", got \"" + c.criterion + "\"");
    if (!(c.spacing > 0.0 && c.spacing <= 0.05)) err("superadiabatic.spacing: must lie in (0, 0.05]");

    if (!(c.integrator_tolerance >= 1e-12 && c.integrator_tolerance < 1.0))
        err("tolerances.integrator: must lie in [1e-12, 1)");
    if (!(c.truncation_tolerance > 0.0)) err("tolerances.truncation: must be positive");
    if (!(c.quadrature_tolerance > 0.0 && c.quadrature_tolerance < 1.0))
        err("tolerances.quadrature: must lie in (0, 1)");
    if (c.max_steps < 1) err("tolerances.max_steps: must be >= 1");

    if (!(c.noise_floor >= 0.0)) err("fit.noise_floor: must be >= 0");
}

}  // namespace

Document parse_toml(const std::string& text, std::vector<std::string>& errors) {
    Document doc;
    std::string table;
    std::set<std::string> seen_tables{""};
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    auto err = [&](int line, const std::string& m) {
        errors.push_back("line " + std::to_string(line) + ": " + m);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const int start_line = line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                err(start_line, "malformed table header '" + line + "'");
                continue;
            }
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!bare_key(name)) {
                err(start_line, "unsupported table name '" + name + "'");
                continue;
            }
            if (!seen_tables.insert(name).second) err(start_line, "duplicate table [" + name + "]");
            table = name;
            doc.tables.push_back(name);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            err(start_line, "expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        std::string rhs = trim(line.substr(eq + 1));
        // Arrays may continue over several lines.
        while (bracket_balance(rhs) > 0 && std::getline(in, raw)) {
            ++line_no;
            rhs += " " + trim(strip_comment(raw));
        }
        if (!bare_key(key)) {
            err(start_line, "unsupported key '" + key + "'");
            continue;
        }
        const std::string full = table.empty() ? key : table + "." + key;
        try {
            Value v = ValueParser(rhs).value();
            v.line = start_line;
            if (!doc.entries.emplace(full, std::move(v)).second) err(start_line, "duplicate key '" + full + "'");
        } catch (const std::invalid_argument& e) {
            err(start_line, full + ": " + e.what());
        }
    }
    return doc;
}

std::string to_string(Operation op) {
    switch (op) {
        case Operation::Simulate: return "simulate";
        case Operation::Sweep: return "sweep";
        case Operation::Crossing: return "crossing";
        case Operation::LoopIntegral: return "loop-integral";
        case Operation::Prefactor: return "prefactor";
        case Operation::Dissipativity: return "dissipativity";
        case Operation::Superadiabatic: return "superadiabatic";
        case Operation::Fit: return "fit";
        case Operation::Compare: return "compare";
    }
    return "";
}

std::vector<std::string> operation_names() {
    return {"simulate", "sweep", "crossing", "loop-integral", "prefactor",
            "dissipativity", "superadiabatic", "fit", "compare"};
}

std::optional<Operation> operation_from_string(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(Operation::Compare); ++i) {
        const auto op = static_cast<Operation>(i);
        if (to_string(op) == name) return op;
    }
    return std::nullopt;
}

Validation validate(const std::string& text) {
    Validation out;
    const Document doc = parse_toml(text, out.errors);
    Reader reader{out.errors};
    const auto& tables = schema();
    for (const auto& [full, value] : doc.entries) {
        const auto dot = full.find('.');
        const std::string table = dot == std::string::npos ? "" : full.substr(0, dot);
        const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
        if (table == "model") {
            if (key == "name") {
                if (auto s = reader.string(full, value)) out.config.model = *s;
            } else if (auto d = reader.number(full, value)) {
                out.config.params[key] = *d;
            }
            continue;
        }
        const auto t = tables.find(table);
        if (t == tables.end()) {
            reader.fail(full, value, table.empty() ? "keys must belong to a table" : "unknown table [" + table + "]");
            continue;
        }
        const auto h = t->second.find(key);
        if (h == t->second.end()) {
            std::string list;
            for (const auto& [name, fn] : t->second) list += " " + name;
            reader.fail(full, value, "unknown key; [" + table + "] accepts" + list);
            continue;
        }
        h->second(full, value, reader, out.config);
    }
    for (const auto& name : doc.tables) {
        if (name != "model" && !tables.count(name)) {
            const bool reported = std::any_of(doc.entries.begin(), doc.entries.end(), [&](const auto& e) {
                return e.first.rfind(name + ".", 0) == 0;
            });
            if (!reported) out.errors.push_back("unknown table [" + name + "]");
        }
    }
    check_ranges(out.config, out.errors);
    return out;
}

std::string to_toml(const ExperimentConfig& c) {
    std::ostringstream o;
    auto dlist = [](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
        return s + "]";
    };
    auto ilist = [](const std::vector<int>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
        return s + "]";
    };
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"' || ch == '\\') q += '\\';
            if (ch == '\n') {
                q += "\\n";
                continue;
            }
            q += ch;
        }
        return q + "\"";
    };
    o << "[model]\n";
    o << "name = " << quote(c.model) << "\n";
    for (const auto& [key, value] : c.params) o << key << " = " << format_double(value) << "\n";
    o << "\n[run]\n";
    if (c.operation) o << "operation = " << quote(to_string(*c.operation)) << "\n";
    o << "epsilons = " << dlist(c.epsilons) << "\n";
    o << "from = " << c.from_label << "\n";
    o << "to = " << c.to_label << "\n";
    if (c.window) o << "window = " << dlist({c.window->first, c.window->second}) << "\n";
    o << "samples = " << c.samples << "\n";
    o << "\n[crossing]\n";
    o << "pair = " << ilist({c.pair.first, c.pair.second}) << "\n";
    o << "reach = " << format_double(c.reach) << "\n";
    if (c.seed) o << "seed = " << dlist({c.seed->real(), c.seed->imag()}) << "\n";
    o << "\n[loop]\n";
    o << "label = " << c.loop_label << "\n";
    o << "half_width = " << format_double(c.loop_half_width) << "\n";
    o << "margin = " << format_double(c.loop_margin) << "\n";
    o << "\n[dissipativity]\n";
    o << "path = " << quote(c.path) << "\n";
    o << "height = " << format_double(c.path_height) << "\n";
    o << "reach = " << format_double(c.path_reach) << "\n";
    o << "\n[superadiabatic]\n";
    o << "mode = " << quote(c.sa_mode) << "\n";
    o << "orders = " << ilist(c.orders) << "\n";
    o << "q_max = " << c.q_max << "\n";
    o << "criterion = " << quote(c.criterion) << "\n";
    o << "spacing = " << format_double(c.spacing) << "\n";
    o << "\n[tolerances]\n";
    o << "integrator = " << format_double(c.integrator_tolerance) << "\n";
    o << "truncation = " << format_double(c.truncation_tolerance) << "\n";
    o << "quadrature = " << format_double(c.quadrature_tolerance) << "\n";
    o << "max_steps = " << c.max_steps << "\n";
    o << "\n[fit]\n";
    o << "input = " << quote(c.fit_input) << "\n";
    o << "column = " << quote(c.fit_column) << "\n";
    o << "noise_floor = " << format_double(c.noise_floor) << "\n";
    o << "\n[output]\n";
    o << "path = " << quote(c.output) << "\n";
    return o.str();
}

std::string defaults_text() {
    ExperimentConfig c;
    c.params = models::parameter_defaults(c.model);
    std::ostringstream o;
    o << "# adiabatic-lab defaults. Every key is optional.\n"
      << "# run.to = 0 selects the highest label of the model.\n"
      << "# run.window = [t0, t1] switches from scattering limits to a finite window.\n"
      << "# crossing.seed = [re, im] starts Newton from one seed instead of the seed grid.\n"
      << "# output.path = \"\" writes CSV to standard output.\n#\n"
      << "# Model parameters:\n";
    for (const auto& name : models::catalog()) {
        o << "#   " << name << ":";
        for (const auto& [key, value] : models::parameter_defaults(name)) o << ' ' << key << '=' << format_double(value);
        o << "\n";
    }
    o << "\n" << to_toml(c);
    return o.str();
}

std::string config_hash(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.output.clear();
    const std::string text = to_toml(c);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << h;
    return o.str();
}

std::string describe_params(const ExperimentConfig& config) {
    std::map<std::string, double> p;
    try {
        p = models::parameter_defaults(config.model);
    } catch (const DomainError&) {
    }
    for (const auto& [key, value] : config.params) p[key] = value;
    std::string s;
    for (const auto& [key, value] : p) s += (s.empty() ? "" : " ") + key + "=" + format_double(value);
    return s;
}

}  // namespace adiabatic::config
