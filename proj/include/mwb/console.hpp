#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mwb/workbench.hpp"

namespace mwb {

// Exit statuses of console commands.
inline constexpr int kOk = 0;
inline constexpr int kCommandError = 1;
inline constexpr int kValidationFailed = 2;

// Line-oriented command interpreter over one open project. Output goes to
// `out`, diagnostics to `err`.
class Console {
 public:
  Console(std::ostream& out, std::ostream& err);

  int execute(const std::string& line);
  // Runs commands until the first failure; blank lines and `#` comments are
  // skipped.
  int run(std::istream& in);

  Workbench& workbench() { return wb_; }
  std::optional<ElementId> selected() const { return selected_; }

  // Element reference: `#n`, a `/model/Class:name` path, or a bare name or
  // label that is unique among objects.
  ElementId resolve(const std::string& ref) const;

 private:
  using Args = std::vector<std::string>;

  void cmd_new(const Args& a);
  void cmd_load(const Args& a);
  void cmd_save(const Args& a);
  void cmd_fixtures(const Args& a);
  void cmd_select(const Args& a);
  void cmd_eval(const std::string& source);
  void cmd_render(const Args& a);
  int cmd_validate(const Args& a);
  void cmd_drag(const Args& a);
  void cmd_set(const Args& a);
  void cmd_undo(bool redo);
  void cmd_serve(const Args& a);
  void cmd_trace(const Args& a);
  void cmd_viewpoint(const Args& a);
  void cmd_control(const Args& a);

  void reset(Workbench wb);
  ElementId current_model() const;
  ElementId current_viewpoint() const;
  void flush_trace();

  std::ostream& out_;
  std::ostream& err_;
  Workbench wb_;
  std::optional<ElementId> selected_;
  std::optional<ElementId> model_;
  std::optional<ElementId> viewpoint_;
};

}  // namespace mwb
