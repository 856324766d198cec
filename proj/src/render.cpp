#include "lalec/render.hpp"

#include <sstream>

namespace lalec {

namespace {

const char* fill(LifecycleState s) {
  switch (s) {
    case LifecycleState::Planned: return "white";
    case LifecycleState::Trainable: return "lightblue";
    case LifecycleState::Trained: return "palegreen";
  }
  return "white";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

class DotWriter {
 public:
  struct Ports {
    std::vector<std::string> entries, exits;
  };

  Ports emit(const Operator& op, int indent) {
    switch (op.kind()) {
      case Operator::Kind::Individual: {
        const auto& ind = op.as_individual();
        std::string id = "n" + std::to_string(next_node_++);
        std::string label = ind.name;
        for (const auto& [k, v] : ind.bound) label += "\\n" + k + "=" + escape(v.to_token());
        auto s = state_of(op);
        line(indent) << id << " [label=\"" << label << "\", class=\"" << state_name(s)
                     << "\", fillcolor=\"" << fill(s) << "\"];\n";
        return {{id}, {id}};
      }
      case Operator::Kind::Pipeline: {
        const auto& p = op.as_pipeline();
        std::vector<Ports> steps;
        for (const auto& s : p.steps) steps.push_back(emit(*s, indent));
        for (const auto& e : p.edges) {
          for (const auto& a : steps[e.from].exits) {
            for (const auto& b : steps[e.to].entries) line(indent) << a << " -> " << b << ";\n";
          }
        }
        Ports out;
        for (auto i : sources(op)) append(out.entries, steps[i].entries);
        for (auto i : sinks(op)) append(out.exits, steps[i].exits);
        return out;
      }
      case Operator::Kind::Choice: {
        int c = next_cluster_++;
        line(indent) << "subgraph cluster_" << c << " {\n";
        line(indent + 1) << "label=\"choice\";\n";
        line(indent + 1) << "style=dashed;\n";
        Ports out;
        for (const auto& a : op.as_choice().alternatives) {
          auto p = emit(*a, indent + 1);
          append(out.entries, p.entries);
          append(out.exits, p.exits);
        }
        line(indent) << "}\n";
        return out;
      }
    }
    return {};
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream& line(int indent) {
    for (int i = 0; i < indent; ++i) out_ << "  ";
    return out_;
  }
  static void append(std::vector<std::string>& a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
  }

  std::ostringstream out_;
  int next_node_ = 0;
  int next_cluster_ = 0;
};

}  // namespace

std::string render_dot(const Operator& op) {
  DotWriter w;
  w.emit(op, 1);
  return "digraph pipeline {\n  rankdir=LR;\n  node [shape=box, style=filled];\n" + w.str() +
         "}\n";
}

}  // namespace lalec
