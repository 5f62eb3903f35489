#include <filesystem>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "cnmt/cli/commands.hpp"

namespace cnmt::cli {

namespace {

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    std::replace(f.begin() + 2, f.end(), '_', '-');
    return f;
}

std::string type_name(ValueKind k) {
    switch (k) {
    case ValueKind::path:
        return "PATH";
    case ValueKind::count:
    case ValueKind::integer:
        return "UINT";
    case ValueKind::real:
        return "FLOAT";
    case ValueKind::filters:
        return "W:N,...";
    case ValueKind::choice:
        return "CHOICE";
    default:
        return "TEXT";
    }
}

const std::map<std::string, std::string> kDescriptions{
    {"preprocess", "normalize, tokenize, filter and truecase a raw parallel corpus"},
    {"build-vocab", "build capped word vocabularies and the character vocabulary"},
    {"train", "train a model, optionally resuming from a checkpoint"},
    {"translate", "translate tokenized sentences with a trained checkpoint"},
    {"score", "corpus BLEU of one system output"},
    {"compare", "BLEU and UNK counts of several systems against a baseline"},
};

using Command = void (*)(const RunConfig&, std::ostream&);

const std::map<std::string, Command> kHandlers{
    {"preprocess", cmd_preprocess}, {"build-vocab", cmd_build_vocab}, {"train", cmd_train},
    {"translate", cmd_translate},   {"score", cmd_score},             {"compare", cmd_compare},
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Character-aware attentional neural machine translation"};
    app.name("cnmt");
    app.require_subcommand(1);
    app.get_formatter()->column_width(34);

    struct Bound {
        std::string config_path;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
    };
    std::map<std::string, Bound> bound;
    for (const auto& name : kCommands) {
        auto* sub = app.add_subcommand(name, kDescriptions.at(name));
        auto& b = bound[name];
        sub->add_option("--config", b.config_path, "flat key = value file; flags override it");
        for (const auto* s : settings_for(name)) {
            std::string help = s->help;
            if (s->required) {
                help += " (required)";
            }
            CLI::Option* opt = nullptr;
            if (s->kind == ValueKind::boolean) {
                opt = sub->add_flag(flag_name(s->key), b.values[s->key], help);
            } else {
                opt = sub->add_option(flag_name(s->key), b.values[s->key], help)->type_name(type_name(s->kind));
            }
            if (s->kind == ValueKind::choice) {
                opt->check(CLI::IsMember(s->choices));
            }
            opt->default_str(s->default_value.empty() ? (s->required ? "" : "from preset") : s->default_value);
            b.options[s->key] = opt;
        }
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    auto& b = bound[name];
    try {
        std::map<std::string, std::string> flags;
        for (const auto& [key, opt] : b.options) {
            if (opt->count() > 0) {
                flags[key] = b.values[key];
            }
        }
        const auto file = b.config_path.empty() ? std::map<std::string, std::string>{} : read_config_file(b.config_path);
        const RunConfig rc(name, file, flags);
        kHandlers.at(name)(rc, err);
        return 0;
    } catch (const NumericalError& e) {
        err << "cnmt " << name << ": numerical error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "cnmt " << name << ": configuration error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "cnmt " << name << ": input error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "cnmt " << name << ": file error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "cnmt " << name << ": error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace cnmt::cli
