#include <iostream>

#include "commands.hpp"
#include "uqxai/oracle.hpp"

namespace uqxai::cli {

int run(int argc, char** argv) {
  CLI::App app{"uqxai: calibration, conformal sets, selective prediction and explanations for "
               "recorded classifier outputs"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  SynthOptions synth;
  CalibrateOptions calibrate;
  ReportOptions report;
  ConformalOptions conformal;
  SelectOptions select;
  ExplainOptions explain;
  auto* s_synth = add_synth(app, synth);
  auto* s_cal = add_calibrate(app, calibrate);
  auto* s_rep = add_report(app, report);
  auto* s_conf = add_conformal(app, conformal);
  auto* s_sel = add_select(app, select);
  auto* s_exp = add_explain(app, explain);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (s_synth->parsed()) {
      apply_config(s_synth, synth.common.config);
      run_synth(synth);
    } else if (s_cal->parsed()) {
      apply_config(s_cal, calibrate.common.config);
      run_calibrate(calibrate);
    } else if (s_rep->parsed()) {
      apply_config(s_rep, report.common.config);
      run_report(report);
    } else if (s_conf->parsed()) {
      apply_config(s_conf, conformal.common.config);
      run_conformal(conformal);
    } else if (s_sel->parsed()) {
      apply_config(s_sel, select.common.config);
      run_select(select);
    } else if (s_exp->parsed()) {
      apply_config(s_exp, explain.common.config);
      run_explain(explain);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace uqxai::cli
