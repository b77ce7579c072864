// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "textal/fine_tune.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "textal/http_util.h"
#include "textal/status_macros.h"

namespace textal {

using nlohmann::json;

absl::StatusOr<std::string> MockFineTuneAdapter::FineTune(
    const FineTuneRequest& r) {
  if (r.examples.empty()) {
    return absl::InvalidArgumentError("fine-tune requires labeled data");
  }
  const std::string base = r.model_ref.substr(0, r.model_ref.find('@'));
  return absl::StrCat(base, "@", r.examples.size());
}

absl::StatusOr<TrainingFiles> WriteTrainingFiles(const FineTuneRequest& r) {
  std::error_code ec;
  std::filesystem::create_directories(r.work_dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat(
        "cannot create ", r.work_dir.string(), ": ", ec.message()));
  }
  TrainingFiles files{r.work_dir / "train.jsonl",
                      r.work_dir / "hyperparams.json"};
  {
    std::ofstream data(files.data_path, std::ios::trunc);
    for (const TrainingExample& ex : r.examples) {
      data << json{{"id", ex.id}, {"input", ex.input}, {"output", ex.output}}
                  .dump()
           << '\n';
    }
    if (!data) {
      return absl::InternalError(
          absl::StrCat("failed writing ", files.data_path.string()));
    }
  }
  json hp = r.hyperparameters;
  hp["model_ref"] = r.model_ref;
  hp["iteration"] = r.iteration;
  std::ofstream out(files.hyperparams_path, std::ios::trunc);
  out << hp.dump(2) << '\n';
  if (!out) {
    return absl::InternalError(
        absl::StrCat("failed writing ", files.hyperparams_path.string()));
  }
  return files;
}

absl::StatusOr<ProcessResult> RunProcess(const std::vector<std::string>& argv,
                                         std::chrono::seconds timeout) {
  if (argv.empty()) return absl::InvalidArgumentError("empty command");
  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    return absl::InternalError("pipe() failed");
  }
  const pid_t pid = fork();
  if (pid < 0) return absl::InternalError("fork() failed");
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(err_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    std::vector<char*> args;
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(out_pipe[1]);
  close(err_pipe[1]);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  int open_fds = 2;
  char buf[4096];
  while (open_fds > 0) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      result.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    const int n = poll(fds, 2, static_cast<int>(std::min<int64_t>(
                                   remaining.count(), 1000)));
    if (n < 0 && errno != EINTR) break;
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
      const ssize_t got = read(fds[i].fd, buf, sizeof(buf));
      if (got <= 0) {
        close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      } else {
        (i == 0 ? result.stdout_text : result.stderr_text).append(buf, got);
      }
    }
  }
  for (const pollfd& p : fds) {
    if (p.fd >= 0) close(p.fd);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

CommandFineTuneAdapter::CommandFineTuneAdapter(
    std::vector<std::string> command, std::chrono::seconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

absl::StatusOr<std::string> CommandFineTuneAdapter::FineTune(
    const FineTuneRequest& r) {
  if (r.examples.empty()) {
    return absl::InvalidArgumentError("fine-tune requires labeled data");
  }
  ASSIGN_OR_RETURN(TrainingFiles files, WriteTrainingFiles(r));
  std::vector<std::string> argv = command_;
  argv.push_back(files.data_path.string());
  argv.push_back(files.hyperparams_path.string());
  ASSIGN_OR_RETURN(ProcessResult proc, RunProcess(argv, timeout_));
  if (proc.timed_out) {
    return absl::DeadlineExceededError(absl::StrCat(
        "training error: command timed out after ", timeout_.count(),
        "s; stderr: ", proc.stderr_text));
  }
  if (proc.exit_code != 0) {
    return absl::InternalError(absl::StrCat(
        "training error: command exited with ", proc.exit_code,
        "; stderr: ", proc.stderr_text));
  }
  std::string last;
  for (absl::string_view line : absl::StrSplit(proc.stdout_text, '\n')) {
    absl::string_view t = absl::StripAsciiWhitespace(line);
    if (!t.empty()) last = std::string(t);
  }
  if (last.empty()) {
    return absl::InternalError(
        "training error: command printed no model reference");
  }
  return last;
}

HttpFineTuneAdapter::HttpFineTuneAdapter(std::string url,
                                         std::chrono::seconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

absl::StatusOr<std::string> HttpFineTuneAdapter::FineTune(
    const FineTuneRequest& r) {
  if (r.examples.empty()) {
    return absl::InvalidArgumentError("fine-tune requires labeled data");
  }
  ASSIGN_OR_RETURN(TrainingFiles files, WriteTrainingFiles(r));
  ASSIGN_OR_RETURN(HttpTarget target, ParseHttpUrl(url_));
  ASSIGN_OR_RETURN(auto client, MakeHttpClient(target, timeout_));
  json body = {{"model_ref", r.model_ref},
               {"iteration", r.iteration},
               {"data_path", files.data_path.string()},
               {"hyperparameters", r.hyperparameters},
               {"num_examples", r.examples.size()}};
  auto res = client->Post(target.path.empty() ? "/" : target.path,
                          body.dump(), "application/json");
  if (!res) {
    return absl::UnavailableError(absl::StrCat(
        "training error: transport failure: ", httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    return absl::InternalError(absl::StrCat("training error: HTTP ",
                                            res->status, ": ", res->body));
  }
  json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (!reply.is_object() || !reply.contains("model") ||
      !reply["model"].is_string()) {
    return absl::InternalError(
        absl::StrCat("training error: reply lacks \"model\": ", res->body));
  }
  return reply["model"].get<std::string>();
}

}  // namespace textal
