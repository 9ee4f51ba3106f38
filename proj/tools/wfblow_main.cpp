#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wfblow/blowup.hpp"
#include "wfblow/harness.hpp"
#include "wfblow/verify.hpp"

namespace {

using namespace wfblow;

std::string fmt_double(double x) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, ptr);
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

OrderedPath path_from(const std::string& text, int base_dim) {
  std::vector<int> indices = parse_index_list(text);
  if (indices.empty()) throw CLI::ValidationError("--path", "empty path");
  if (base_dim < 0) base_dim = indices.front() == 0 ? 0 : 1;
  return OrderedPath(indices, base_dim);
}

OrderedPath default_path(int n) {
  std::vector<int> indices;
  for (int i = 0; i <= n; ++i) indices.push_back(i);
  return OrderedPath(indices, 0);
}

void write_atomically(const std::string& out_path, const std::string& content) {
  std::filesystem::path target(out_path);
  std::filesystem::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << content;
  }
  std::filesystem::rename(temp, target);
}

std::vector<bool> flips_from(const std::vector<int>& flip_steps, int count) {
  std::vector<bool> flips(count, false);
  for (int m : flip_steps) {
    if (m < 1 || m > count)
      throw CLI::ValidationError("--flip", "step out of range");
    flips[m - 1] = true;
  }
  return flips;
}

// JSON config mirrors the flags one-to-one; explicitly passed flags win.
void apply_config(CLI::App* cmd, const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot read config " + config_path);
  nlohmann::json j;
  in >> j;
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ",";
        joined += item.dump();
      }
      opt->add_result(joined);
    } else if (value.is_string()) {
      opt->add_result(value.get<std::string>());
    } else {
      opt->add_result(value.dump());
    }
  }
}

int run_op(const std::string& kind, int n, const std::string& path_text,
           const std::string& coeff_text, const std::string& expr,
           const std::vector<int>& flip_steps) {
  OperatorSpec spec;
  if (kind == "simplex") {
    spec = simplex_operator(n);
  } else if (kind == "symmetric") {
    spec = symmetric_operator(n);
  } else if (kind == "transformed") {
    OrderedPath path = path_from(path_text, -1);
    n = path.ambient_dim();
    spec = transformed_operator(
        path, n, flips_from(flip_steps, n - path.base_dim() - 1));
  } else {
    throw CLI::ValidationError("--kind", "unknown operator kind " + kind);
  }

  if (!coeff_text.empty()) {
    std::vector<int> ij = parse_index_list(coeff_text);
    if (ij.size() != 2) throw CLI::ValidationError("--coeff", "need i,j");
    std::cout << coefficient(spec, ij[0], ij[1]).to_string() << "\n";
  }
  if (!expr.empty()) {
    RationalFunction f = parse_expression(expr);
    std::cout << apply_operator(spec, f).to_string() << "\n";
  }
  return 0;
}

int run_extend(const std::string& path_text, const std::string& base_expr,
               const std::string& lambda_text, const std::string& out_path) {
  OrderedPath path = path_from(path_text, -1);
  int n = path.ambient_dim();
  Stratum base_face = simplex_face_of(path.index_set(path.base_dim()), n);
  BaseSolution base(n, base_face, parse_expression(base_expr),
                    parse_rational(lambda_text));
  ExtensionResult ext = extend_along_path(base, path);
  std::string json = ext.pieces.to_json() + "\n";
  if (out_path.empty())
    std::cout << json;
  else
    write_atomically(out_path, json);
  return 0;
}

int run_blowup(const std::string& path_text, const std::string& point_text,
               bool inverse, const std::vector<int>& flip_steps,
               const std::string& chart_path) {
  OrderedPath path = path_from(path_text, -1);
  int n = path.ambient_dim();
  BlowupChain chain =
      make_chain(path, n, flips_from(flip_steps, n - path.base_dim() - 1));

  if (!chart_path.empty()) {
    nlohmann::json j;
    for (const auto& [c, rf] : chain.forward)
      j["forward"]["p" + std::to_string(c)] = rf.to_string();
    for (const auto& [c, rf] : chain.inverse)
      j["inverse"]["p" + std::to_string(c)] = rf.to_string();
    write_atomically(chart_path, j.dump(2) + "\n");
  }

  if (!point_text.empty()) {
    std::vector<double> coords = parse_point(point_text);
    if (static_cast<int>(coords.size()) != n)
      throw CLI::ValidationError("--point", "expected " + std::to_string(n) +
                                                " coordinates");
    std::map<int, double> p;
    for (int i = 1; i <= n; ++i) p[i] = coords[i - 1];
    std::map<int, double> image =
        inverse ? chain.map_point_inverse(p) : chain.map_point(p);
    std::string line;
    for (int i = 1; i <= n; ++i) {
      if (!line.empty()) line += " ";
      line += fmt_double(image.at(i));
    }
    std::cout << line << "\n";
  }
  return 0;
}

int run_verify(const std::string& suite, int n, const std::string& path_text,
               unsigned seed, const std::string& out_path) {
  OrderedPath path =
      path_text.empty() ? default_path(n) : path_from(path_text, -1);
  VerifyReport report =
      suite == "all" ? verify_all(path, seed) : verify_suite(suite, path, seed);
  std::string json = report.to_json() + "\n";
  write_atomically(out_path, json);
  for (const auto& c : report.cases)
    std::cout << (c.pass ? "pass" : "FAIL") << " " << c.name << " metric "
              << fmt_double(c.metric) << " tol " << fmt_double(c.tol) << "\n";
  std::cout << (report.all_pass() ? "all checks passed"
                                  : "some checks failed")
            << " (" << report.cases.size() << " cases)\n";
  return report.all_pass() ? 0 : 1;
}

int run_solve(int n, const std::string& path_text, int grid_size,
              const std::string& vertex_data, const std::string& csv_path) {
  OrderedPath path =
      path_text.empty() ? default_path(n) : path_from(path_text, -1);
  n = path.ambient_dim();
  OperatorSpec op = transformed_operator(path, n);

  std::map<Stratum, RationalFunction> data =
      origin_vertex_data(path, n, Rational(0));
  std::stringstream ss(vertex_data);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--vertex-data", "expected name=value");
    std::string name = item.substr(0, eq);
    Rational value = parse_rational(item.substr(eq + 1));
    std::map<int, int> fixed;
    if (name == "origin") {
      for (int j = 1; j <= n; ++j) fixed[path.index_at(j)] = 0;
    } else {
      if (static_cast<int>(name.size()) != n)
        throw CLI::ValidationError("--vertex-data",
                                   "vertex bits must have length " +
                                       std::to_string(n));
      for (int j = 1; j <= n; ++j)
        fixed[path.index_at(j)] = name[j - 1] == '0' ? 0 : 1;
    }
    data[Stratum::cube_face(IndexSet({}, true), fixed)] =
        RationalFunction::constant(value);
  }

  GridSpec grid = GridSpec::over(op.stratum, grid_size);
  DirichletProblem problem{op, data, std::nullopt};
  SolveResult solved = solve_dirichlet_cube(problem, grid);

  std::ostringstream csv;
  solved.write_csv(csv);
  if (csv_path.empty())
    std::cout << csv.str();
  else
    write_atomically(csv_path, csv.str());

  // Deviation from the multilinear interpolant of the vertex data, the
  // exact solution of the hierarchical problem.
  double worst = 0.0;
  std::vector<int> multi(grid.dims.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t axis) {
    if (axis == multi.size()) {
      double exact = 0.0;
      for (const auto& [vertex, rf] : data) {
        double weight = 1.0;
        for (std::size_t i = 0; i < grid.dims.size(); ++i) {
          double x = static_cast<double>(multi[i]) / grid_size;
          weight *= vertex.fixed_value(grid.dims[i]) == 1 ? x : 1.0 - x;
        }
        exact += weight * to_double(rf.numerator().constant_value());
      }
      worst = std::max(worst, std::abs(solved.value_at(multi) - exact));
      return;
    }
    for (int i = 0; i <= grid_size; ++i) {
      multi[axis] = i;
      rec(axis + 1);
    }
  };
  rec(0);
  std::cout << "max_dev " << fmt_double(worst) << "\n";
  return 0;
}

int run_report(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot read " + report_path);
  nlohmann::json j;
  in >> j;
  bool all_pass = true;
  for (const auto& entry : j.at("cases")) {
    std::string status = entry.at("status").get<std::string>();
    if (status != "pass") all_pass = false;
    std::cout << status << " " << entry.at("name").get<std::string>() << "\n";
  }
  std::cout << (all_pass ? "all checks passed" : "some checks failed") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratified blow-up toolkit for the degenerate backward "
               "equation on the simplex"};
  app.require_subcommand(1);

  std::string config_path;

  auto* op_cmd = app.add_subcommand("op", "print operator coefficients or apply");
  std::string op_kind = "simplex", op_path, op_coeff, op_expr;
  int op_n = 2;
  std::vector<int> op_flips;
  op_cmd->add_option("--kind", op_kind);
  op_cmd->add_option("--n", op_n);
  op_cmd->add_option("--path", op_path);
  op_cmd->add_option("--coeff", op_coeff);
  op_cmd->add_option("--expr", op_expr);
  op_cmd->add_option("--flip", op_flips);
  op_cmd->add_option("--config", config_path);

  auto* extend_cmd = app.add_subcommand("extend", "pathwise extension to JSON");
  std::string ext_path, ext_base = "1", ext_lambda = "0", ext_out;
  extend_cmd->add_option("--path", ext_path)->required();
  extend_cmd->add_option("--base", ext_base);
  extend_cmd->add_option("--lambda", ext_lambda);
  extend_cmd->add_option("--out", ext_out);
  extend_cmd->add_option("--config", config_path);

  auto* blowup_cmd = app.add_subcommand("blowup", "map points through the chain");
  std::string bl_path, bl_point, bl_chart;
  bool bl_inverse = false;
  std::vector<int> bl_flips;
  blowup_cmd->add_option("--path", bl_path)->required();
  blowup_cmd->add_option("--point", bl_point);
  blowup_cmd->add_flag("--inverse", bl_inverse);
  blowup_cmd->add_option("--flip", bl_flips);
  blowup_cmd->add_option("--emit-chart", bl_chart);
  blowup_cmd->add_option("--config", config_path);

  auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
  std::string ver_suite = "all", ver_path, ver_out = "report.json";
  int ver_n = 2;
  unsigned ver_seed = 1;
  verify_cmd->add_option("suite", ver_suite);
  verify_cmd->add_option("--n", ver_n);
  verify_cmd->add_option("--path", ver_path);
  verify_cmd->add_option("--seed", ver_seed);
  verify_cmd->add_option("--out", ver_out);
  verify_cmd->add_option("--config", config_path);

  auto* solve_cmd = app.add_subcommand("solve", "hierarchical Dirichlet solve");
  std::string sol_path, sol_data = "origin=1", sol_csv;
  int sol_n = 2, sol_grid = 16;
  solve_cmd->add_option("--n", sol_n);
  solve_cmd->add_option("--path", sol_path);
  solve_cmd->add_option("--grid", sol_grid);
  solve_cmd->add_option("--vertex-data", sol_data);
  solve_cmd->add_option("--csv", sol_csv);
  solve_cmd->add_option("--config", config_path);

  auto* report_cmd = app.add_subcommand("report", "summarise a report file");
  std::string rep_path = "report.json";
  report_cmd->add_option("file", rep_path);
  report_cmd->add_option("--config", config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) {
      apply_config(active, config_path);
    }
    if (active == op_cmd)
      return run_op(op_kind, op_n, op_path, op_coeff, op_expr, op_flips);
    if (active == extend_cmd)
      return run_extend(ext_path, ext_base, ext_lambda, ext_out);
    if (active == blowup_cmd)
      return run_blowup(bl_path, bl_point, bl_inverse, bl_flips, bl_chart);
    if (active == verify_cmd)
      return run_verify(ver_suite, ver_n, ver_path, ver_seed, ver_out);
    if (active == solve_cmd)
      return run_solve(sol_n, sol_path, sol_grid, sol_data, sol_csv);
    if (active == report_cmd) return run_report(rep_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
