#include "voltpath/milp.hpp"

#include <algorithm>
#include <sstream>

#include "json_util.hpp"

namespace voltpath {

namespace {

// Emits space-separated tokens, wrapping lines at a fixed width with an
// indented continuation (LP format permits breaks between any tokens).
class LineWriter {
  public:
    void token(const std::string& tok) {
        if (line_.empty()) {
            line_ = " " + tok;
        } else if (line_.size() + 1 + tok.size() > 72) {
            out_ << line_ << '\n';
            line_ = "   " + tok;
        } else {
            line_ += " " + tok;
        }
    }

    void flush_line() {
        if (!line_.empty()) {
            out_ << line_ << '\n';
            line_.clear();
        }
    }

    void raw(const std::string& text) {
        flush_line();
        out_ << text << '\n';
    }

    std::string str() {
        flush_line();
        return out_.str();
    }

  private:
    std::ostringstream out_;
    std::string line_;
};

std::string edge_var(const Edge& e) {
    return "x_" + std::to_string(e.from) + "_" + std::to_string(e.to);
}

std::string node_var(int id) {
    return "b_" + std::to_string(id);
}

// Appends "coef var" with an explicit sign; the first term of a row omits
// a leading plus.
void term(LineWriter& out, bool& first, double coef, const std::string& var) {
    if (first) {
        if (coef < 0.0) {
            out.token("-");
            out.token(detail::format_full(-coef));
        } else {
            out.token(detail::format_full(coef));
        }
        first = false;
    } else {
        out.token(coef < 0.0 ? "-" : "+");
        out.token(detail::format_full(std::abs(coef)));
    }
    out.token(var);
}

}  // namespace

std::string export_milp(const Instance& instance, const ResourceModel& model) {
    validate(instance);

    // Canonical edge order regardless of how the instance was assembled.
    std::vector<const Edge*> edges;
    edges.reserve(instance.edges.size());
    for (const auto& e : instance.edges) {
        edges.push_back(&e);
    }
    std::sort(edges.begin(), edges.end(), [](const Edge* a, const Edge* b) {
        return a->from != b->from ? a->from < b->from : a->to < b->to;
    });

    const double capacity = instance.battery.capacity_coulombs;
    const double soc_max = instance.battery.soc_max;

    // Per-edge charge drop at a given state of charge; affine in soc, so
    // window extremes sit at the soc endpoints.
    auto drop_at = [&](const Edge& e, double soc) {
        const double inv_v = model.kind == ResourceKind::linear
                                 ? model.fit.a * soc + model.fit.b * e.power_w + model.fit.c
                                 : 1.0 / model.v_nom;
        return detail::soc_drop(e.power_w, inv_v, e.time_s, capacity);
    };
    // Coefficient picked up by b_i when the propagation row is rearranged
    // onto one side: b_j - (1 - a*P*t/C) b_i + M x_ij <= M - drop-at-zero.
    auto soc_coef = [&](const Edge& e) {
        const double a = model.kind == ResourceKind::linear ? model.fit.a : 0.0;
        return 1.0 - detail::soc_drop(e.power_w, a, e.time_s, capacity);
    };

    LineWriter out;
    out.raw("\\ model=" + to_string(model.kind));
    out.raw("Minimize");
    {
        bool first = true;
        out.token("obj:");
        for (const Edge* e : edges) {
            term(out, first, e->cost, edge_var(*e));
        }
        out.flush_line();
    }

    out.raw("Subject To");
    {
        bool first = true;
        out.token("deg_start:");
        for (const Edge* e : edges) {
            if (e->from == instance.start) {
                term(out, first, 1.0, edge_var(*e));
            }
        }
        out.token("=");
        out.token("1");
        out.flush_line();
    }
    {
        bool first = true;
        out.token("deg_goal:");
        for (const Edge* e : edges) {
            if (e->to == instance.goal) {
                term(out, first, 1.0, edge_var(*e));
            }
        }
        out.token("=");
        out.token("1");
        out.flush_line();
    }
    for (const auto& node : instance.nodes) {
        if (node.id == instance.start || node.id == instance.goal) {
            continue;
        }
        bool first = true;
        bool any = false;
        out.token("flow_" + std::to_string(node.id) + ":");
        for (const Edge* e : edges) {
            if (e->from == node.id) {
                term(out, first, 1.0, edge_var(*e));
                any = true;
            } else if (e->to == node.id) {
                term(out, first, -1.0, edge_var(*e));
                any = true;
            }
        }
        if (!any) {
            term(out, first, 0.0, node_var(node.id));  // isolated node: 0 = 0
        }
        out.token("=");
        out.token("0");
        out.flush_line();
    }
    for (const Edge* e : edges) {
        // Smallest M keeping the row slack for an unused edge across the
        // whole charge window: soc_max plus the edge's largest drop.
        const double drop_lo = drop_at(*e, 0.0);
        const double drop_hi = drop_at(*e, soc_max);
        const double big_m = soc_max + std::max(drop_lo, drop_hi);
        bool first = true;
        out.token("batt_" + std::to_string(e->from) + "_" + std::to_string(e->to) + ":");
        term(out, first, 1.0, node_var(e->to));
        term(out, first, -soc_coef(*e), node_var(e->from));
        term(out, first, big_m, edge_var(*e));
        out.token("<=");
        out.token(detail::format_full(big_m - drop_lo));
        out.flush_line();
    }

    out.raw("Bounds");
    for (const auto& node : instance.nodes) {
        if (node.id == instance.start) {
            out.token(node_var(node.id));
            out.token("=");
            out.token(detail::format_full(instance.soc0));
        } else {
            out.token("0");
            out.token("<=");
            out.token(node_var(node.id));
            out.token("<=");
            out.token(detail::format_full(soc_max));
        }
        out.flush_line();
    }

    out.raw("Binaries");
    for (const Edge* e : edges) {
        out.token(edge_var(*e));
    }
    out.flush_line();
    out.raw("End");
    return out.str();
}

void export_milp_file(const Instance& instance, const ResourceModel& model,
                      const std::filesystem::path& path) {
    detail::write_file(path, export_milp(instance, model));
}

}  // namespace voltpath
