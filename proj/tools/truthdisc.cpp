// Command-line front end. Talks to the library only through truthdisc.h.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "truthdisc/truthdisc.h"

namespace {

struct Common {
  std::string config_file;
  std::string save_config;
  std::vector<std::string> sets;
  std::map<std::string, std::string> keyed;  // config key -> flag value
  std::map<std::string, CLI::Option*> keyed_opts;
  std::map<std::string, std::string> request;
  std::vector<std::string> methods;
  std::vector<std::string> trusted;
  bool per_attribute = false;
  bool sampled = false;
};

[[noreturn]] void fail(td_status status, const std::string& context) {
  std::fprintf(stderr, "truthdisc: %s: %s (%s)\n", context.c_str(), td_last_error(), td_status_name(status));
  std::exit(static_cast<int>(status));
}

void check(td_status status, const std::string& context) {
  if (status != TD_OK) fail(status, context);
}

std::string dashed(std::string s) {
  for (auto& c : s)
    if (c == '_' || c == '.') c = '-';
  return s;
}

// Every config key becomes --key (and --section-key).
void add_config_flags(CLI::App* cmd, Common& c) {
  for (std::size_t i = 0; i < td_config_key_count(); ++i) {
    const std::string key = td_config_key(i);
    const auto dot = key.find('.');
    const std::string names = "--" + dashed(key.substr(dot + 1)) + ",--" + dashed(key);
    c.keyed_opts[key] = cmd->add_option(names, c.keyed[key], "config key " + key)->group("Config keys");
  }
  cmd->add_option("--config", c.config_file, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override a config key: section.key=value (repeatable)");
  cmd->add_option("--save-config", c.save_config, "write the effective config to this file");
}

void add_path(CLI::App* cmd, Common& c, const std::string& flag, const std::string& key, const std::string& help,
              bool required = false) {
  auto* opt = cmd->add_option(flag, c.request[key], help);
  if (required) opt->required();
}

void add_data_flags(CLI::App* cmd, Common& c, bool gold_required_hint) {
  add_path(cmd, c, "--schema", "schema", "schema file (name,kind,tolerance_param)", true);
  add_path(cmd, c, "--claims", "claims", "claims file (source,object,attribute,value)");
  add_path(cmd, c, "--gold", "gold", gold_required_hint ? "gold file (or --trusted)" : "gold file");
  cmd->add_option("--trusted", c.trusted, "build gold by majority of these sources")->delimiter(',');
  add_path(cmd, c, "--out", "out", "output directory");
}

td_config* build_config(const Common& c) {
  td_config* cfg = nullptr;
  check(td_config_create(&cfg), "config");
  if (!c.config_file.empty()) check(td_config_load(cfg, c.config_file.c_str()), "--config");
  check(td_config_apply_env(cfg), "environment");
  for (const auto& [key, opt] : c.keyed_opts)
    if (opt->count() > 0) check(td_config_set(cfg, key.c_str(), c.keyed.at(key).c_str()), "--" + dashed(key));
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "truthdisc: --set %s: expected section.key=value\n", s.c_str());
      std::exit(static_cast<int>(TD_ERR_INVALID_ARGUMENT));
    }
    check(td_config_set(cfg, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()), "--set " + s);
  }
  if (!c.save_config.empty()) check(td_config_save(cfg, c.save_config.c_str()), "--save-config");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truth discovery over conflicting multi-source claims"};
  app.set_version_flag("--version", td_version());
  app.require_subcommand(1);

  std::map<std::string, Common> per_command;
  std::string method_list;
  for (std::size_t i = 0; i < td_method_count(); ++i)
    method_list += std::string(i ? ", " : "") + td_method_name(i);

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset (claims, gold, schema, known copiers)");
  Common& c_gen = per_command["generate"];
  add_path(gen, c_gen, "--spec", "spec", "synthetic spec (INI)", true);
  add_path(gen, c_gen, "--seed", "seed", "generator seed");
  add_path(gen, c_gen, "--out", "out", "output directory");
  add_config_flags(gen, c_gen);

  auto* prof = app.add_subcommand("profile", "item and source profiles plus histograms");
  Common& c_prof = per_command["profile"];
  add_data_flags(prof, c_prof, false);
  add_path(prof, c_prof, "--snapshots", "snapshots", "manifest of label,claims,gold rows");
  add_config_flags(prof, c_prof);

  auto* fuse = app.add_subcommand("fuse", "resolve conflicts with one method");
  Common& c_fuse = per_command["fuse"];
  add_data_flags(fuse, c_fuse, false);
  fuse->add_option("--method", c_fuse.methods, "one of: " + method_list)->required()->expected(1);
  fuse->add_flag("--per-attribute", c_fuse.per_attribute, "trust per (source, attribute)");
  add_path(fuse, c_fuse, "--input-trust", "trust", "fixed trust file (source,trust)");
  add_path(fuse, c_fuse, "--known-copiers", "copiers", "known copiers (copier,original,probability)");
  add_config_flags(fuse, c_fuse);

  auto* copy = app.add_subcommand("copydetect", "copy probabilities and copy-group report");
  Common& c_copy = per_command["copydetect"];
  add_data_flags(copy, c_copy, false);
  add_path(copy, c_copy, "--groups", "groups", "groups to report (remarks,members)");
  add_path(copy, c_copy, "--input-trust", "trust", "fixed trust file (source,trust)");
  add_path(copy, c_copy, "--known-copiers", "copiers", "known copiers (copier,original,probability)");
  add_config_flags(copy, c_copy);

  auto* eval = app.add_subcommand("evaluate", "score one method against gold");
  Common& c_eval = per_command["evaluate"];
  add_data_flags(eval, c_eval, true);
  eval->add_option("--method", c_eval.methods, "one of: " + method_list)->required()->expected(1);
  eval->add_flag("--per-attribute", c_eval.per_attribute, "trust per (source, attribute)");
  eval->add_flag("--sampled-trust", c_eval.sampled, "also run with sampled trust as input");
  add_path(eval, c_eval, "--input-trust", "trust", "fixed trust file (source,trust)");
  add_path(eval, c_eval, "--known-copiers", "copiers", "known copiers (copier,original,probability)");
  add_path(eval, c_eval, "--snapshots", "snapshots", "manifest of label,claims,gold rows");
  add_config_flags(eval, c_eval);

  auto* cmp = app.add_subcommand("compare", "score several methods against gold");
  Common& c_cmp = per_command["compare"];
  add_data_flags(cmp, c_cmp, true);
  cmp->add_option("--methods", c_cmp.methods, "comma-separated; default all of: " + method_list)->delimiter(',');
  cmp->add_flag("--per-attribute", c_cmp.per_attribute, "trust per (source, attribute)");
  cmp->add_flag("--sampled-trust", c_cmp.sampled, "also run every method with sampled trust");
  add_path(cmp, c_cmp, "--input-trust", "trust", "fixed trust file (source,trust)");
  add_path(cmp, c_cmp, "--known-copiers", "copiers", "known copiers (copier,original,probability)");
  add_path(cmp, c_cmp, "--snapshots", "snapshots", "manifest of label,claims,gold rows");
  add_config_flags(cmp, c_cmp);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  Common& c = per_command.at(command);

  td_config* cfg = build_config(c);
  td_request* req = nullptr;
  check(td_request_create(cfg, &req), "request");
  for (const auto& [key, value] : c.request)
    if (!value.empty()) check(td_request_set(req, key.c_str(), value.c_str()), "--" + key);
  if (c.per_attribute && c.methods.empty()) {
    for (std::size_t i = 0; i < td_method_count(); ++i) c.methods.emplace_back(td_method_name(i));
  }
  for (const auto& m : c.methods) {
    const std::string name = c.per_attribute ? m + "Attr" : m;
    check(td_request_set(req, "method", name.c_str()), "--method");
  }
  for (const auto& t : c.trusted) check(td_request_set(req, "trusted", t.c_str()), "--trusted");
  if (c.sampled) check(td_request_set(req, "sampled", "1"), "--sampled-trust");

  const td_status status = td_run(req, command.c_str());
  td_request_destroy(req);
  td_config_destroy(cfg);
  if (status != TD_OK) fail(status, command);
  return 0;
}
