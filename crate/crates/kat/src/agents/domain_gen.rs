//! Generator for the Fort Attack domain description.
//!
//! The signature and axioms are fixed; the geometric statics (adjacency,
//! shooting proximity, forest cells, regions and their component map) are
//! functions of the scenario geometry, so the whole document is emitted
//! from the ScenarioConfig. The shipped `domains/fortattack.kat` is this
//! generator's output for the default scenario, pinned byte-exact by a
//! test.

use std::fmt::Write;

use crate::fortattack::ScenarioConfig;
use crate::rulelang::{parse_domain, DomainDescription, ParseError};

/// Environment agent ids 0..6 map to these constants.
pub const AGENT_CONSTS: [&str; 6] = ["aha", "g1", "g2", "a1", "a2", "a3"];

pub fn agent_const(id: usize) -> &'static str {
    AGENT_CONSTS[id]
}

pub fn region_name(rx: i64, ry: i64) -> String {
    format!("rg_{rx}_{ry}")
}

/// Emit the complete domain document for a scenario.
pub fn fortattack_domain_text(cfg: &ScenarioConfig) -> String {
    let n = cfg.grid_n as i64;
    let rg = cfg.region_grid as i64;
    let cells_per_region = n / rg;
    let cell = cfg.cell_size();

    let mut s = String::new();
    s.push_str("% Fort Attack domain description, two coupled resolutions.\n");
    s.push_str("% Generated from the scenario configuration; regenerate rather than edit.\n\n");

    // ---- sorts ----
    s.push_str("sorts\n");
    s.push_str("  ad_hoc = {aha}.\n");
    s.push_str("  teammate = {g1, g2}.\n");
    s.push_str("  guard = ad_hoc + teammate.\n");
    s.push_str("  attacker = {a1, a2, a3}.\n");
    s.push_str("  ext_agent = teammate + attacker.\n");
    let _ = writeln!(s, "  x_val = 0..{}.", n - 1);
    let _ = writeln!(s, "  y_val = 0..{}.", n - 1);
    s.push_str("  region = {");
    let mut first = true;
    for ry in 0..rg {
        for rx in 0..rg {
            if !first {
                s.push_str(", ");
            }
            first = false;
            s.push_str(&region_name(rx, ry));
        }
    }
    s.push_str("}.\n\n");

    // ---- predicates ----
    s.push_str(
        "predicates
  inertial loc(ad_hoc, x_val, y_val).
  inertial agent_loc(ext_agent, x_val, y_val).
  inertial shot(ext_agent).
  inertial spread_attack(attacker).
  defined in_range(guard, attacker).
  defined in_forest(attacker).
  action move(ad_hoc, x_val, y_val).
  action shoot(ad_hoc, attacker).
  action noop(ad_hoc).
  static next_to(x_val, y_val, x_val, y_val).
  static close(x_val, y_val, x_val, y_val).
  static forest(x_val, y_val).
  static component(x_val, y_val, region).
  coarse inertial loc*(ad_hoc, region).
  coarse inertial agent_loc*(ext_agent, region).
  coarse inertial shot*(ext_agent).
  coarse inertial spread_attack*(attacker).
  coarse defined in_range*(ad_hoc, attacker).
  coarse defined frontal_threat*.
  coarse defined defend_region*(region).
  coarse action move*(ad_hoc, region).
  coarse action shoot*(ad_hoc, attacker).
  coarse action noop*(ad_hoc).
  coarse static next_to*(region, region).
  coarse static close*(region, region).
  coarse static near_fort*(region).
  coarse static front_region*(region).
  coarse static flank_region*(region).

",
    );

    // ---- rules ----
    s.push_str(
        "rules
  % fine dynamics
  move(G, X2, Y2) causes loc(G, X2, Y2).
  move(G, X2, Y2) causes -loc(G, X1, Y1) if loc(G, X1, Y1), X1 != X2.
  move(G, X2, Y2) causes -loc(G, X1, Y1) if loc(G, X1, Y1), Y1 != Y2.
  impossible move(G, X2, Y2) if loc(G, X1, Y1), not next_to(X1, Y1, X2, Y2).
  shoot(G, A) causes shot(A).
  impossible shoot(G, A) if not in_range(G, A).
  impossible shoot(G, A) if shot(A).
  in_range(G, A) if loc(G, X1, Y1), agent_loc(A, X2, Y2), close(X1, Y1, X2, Y2), not shot(A).
  in_range(G, A) if agent_loc(G, X1, Y1), agent_loc(A, X2, Y2), close(X1, Y1, X2, Y2), not shot(G), not shot(A).
  in_forest(A) if agent_loc(A, X, Y), forest(X, Y), not shot(A).
  % attackers usually spread and attack; retractable per attacker
  initial default spread_attack(A) if attacker(A).
  cr-rule -spread_attack(A) if attacker(A).
  % coarse dynamics
  move*(G, Rg2) causes loc*(G, Rg2).
  move*(G, Rg2) causes -loc*(G, Rg1) if loc*(G, Rg1), Rg1 != Rg2.
  impossible move*(G, Rg2) if loc*(G, Rg1), not next_to*(Rg1, Rg2).
  shoot*(G, A) causes shot*(A).
  impossible shoot*(G, A) if not in_range*(G, A).
  impossible shoot*(G, A) if shot*(A).
  in_range*(G, A) if loc*(G, Rg1), agent_loc*(A, Rg2), close*(Rg1, Rg2), not shot*(A).
  frontal_threat* if -spread_attack*(A1), -spread_attack*(A2), A1 != A2.
  defend_region*(Rg) if frontal_threat*, front_region*(Rg).
  defend_region*(Rg) if not frontal_threat*, flank_region*(Rg).
  % bridge axioms: seed the coarse description from the fine one
  loc*(G, Rg) if loc(G, X, Y), component(X, Y, Rg).
  agent_loc*(A, Rg) if agent_loc(A, X, Y), component(X, Y, Rg).
  shot*(A) if shot(A).
  spread_attack*(A) if spread_attack(A).
  % goals, highest priority first; the last one is the unconditional default
  goal shot*(A) if in_range*(aha, A).
",
    );
    if cfg.intercept_radius.is_some() {
        s.push_str("  goal loc*(aha, Rg) if agent_loc*(A, Rg), near_fort*(Rg), not shot*(A).\n");
    }
    s.push_str("  goal loc*(aha, Rg) if defend_region*(Rg).\n");
    let (fx, fy) = region_of_point(cfg, cfg.fort.x, cfg.fort.y);
    let default_rg = region_name(fx, (fy + 1).min(rg - 1));
    let _ = writeln!(s, "  goal loc*(aha, {default_rg}).");
    s.push_str(
        "  % action costs
  cost move(G, X, Y) = 1.
  cost shoot(G, A) = 1.
  cost noop(G) = 1.
  cost move*(G, Rg) = 2.
  cost shoot*(G, A) = 1.
  cost noop*(G) = 1.
  % geometric statics (generated)
",
    );

    // next_to: 4-neighborhood.
    for x in 0..n {
        for y in 0..n {
            for (dx, dy) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && nx < n && ny >= 0 && ny < n {
                    let _ = writeln!(s, "  next_to({x}, {y}, {nx}, {ny}).");
                }
            }
        }
    }
    // close: cell centers within shooting range.
    for x1 in 0..n {
        for y1 in 0..n {
            let (cx1, cy1) = cfg.cell_center(x1, y1);
            for x2 in 0..n {
                for y2 in 0..n {
                    let (cx2, cy2) = cfg.cell_center(x2, y2);
                    let d = ((cx1 - cx2).powi(2) + (cy1 - cy2).powi(2)).sqrt();
                    if d <= cfg.shoot_range {
                        let _ = writeln!(s, "  close({x1}, {y1}, {x2}, {y2}).");
                    }
                }
            }
        }
    }
    // forest cells (centers inside the rectangle).
    if let Some(f) = &cfg.forest {
        for x in 0..n {
            for y in 0..n {
                let (cx, cy) = cfg.cell_center(x, y);
                if f.contains(cx, cy) {
                    let _ = writeln!(s, "  forest({x}, {y}).");
                }
            }
        }
    }
    // Region adjacency and proximity.
    for ry1 in 0..rg {
        for rx1 in 0..rg {
            for ry2 in 0..rg {
                for rx2 in 0..rg {
                    if (rx1 - rx2).abs() + (ry1 - ry2).abs() == 1 {
                        let _ = writeln!(s, "  next_to*({}, {}).", region_name(rx1, ry1), region_name(rx2, ry2));
                    }
                }
            }
        }
    }
    let region_size = cells_per_region as f64 * cell;
    let slack = region_size * std::f64::consts::SQRT_2 / 2.0;
    for ry1 in 0..rg {
        for rx1 in 0..rg {
            let c1 = ((rx1 as f64 + 0.5) * region_size, (ry1 as f64 + 0.5) * region_size);
            for ry2 in 0..rg {
                for rx2 in 0..rg {
                    let c2 = ((rx2 as f64 + 0.5) * region_size, (ry2 as f64 + 0.5) * region_size);
                    let d = ((c1.0 - c2.0).powi(2) + (c1.1 - c2.1).powi(2)).sqrt();
                    if d <= cfg.shoot_range + slack {
                        let _ = writeln!(s, "  close*({}, {}).", region_name(rx1, ry1), region_name(rx2, ry2));
                    }
                }
            }
        }
    }
    // Intercept band: regions whose center sits close enough to the fort
    // that an attacker inside them is an immediate threat.
    if let Some(r) = cfg.intercept_radius {
        for ry in 0..rg {
            for rx in 0..rg {
                let c = ((rx as f64 + 0.5) * region_size, (ry as f64 + 0.5) * region_size);
                let d = ((c.0 - cfg.fort.x).powi(2) + (c.1 - cfg.fort.y).powi(2)).sqrt();
                if d <= r {
                    let _ = writeln!(s, "  near_fort*({}).", region_name(rx, ry));
                }
            }
        }
    }
    // Defensive positioning: the fort's region under a frontal threat, a
    // covering region (toward the forest when present) otherwise.
    let _ = writeln!(s, "  front_region*({}).", region_name(fx, fy));
    let flank = match &cfg.forest {
        Some(f) => {
            let (ox, _) = f.center();
            let (frx, _) = region_of_point(cfg, ox, 0.0);
            let dx = (frx - fx).signum();
            if dx == 0 {
                region_name(fx, (fy + 1).min(rg - 1))
            } else {
                region_name(fx + dx, fy.max(0))
            }
        }
        None => region_name(fx, (fy + 1).min(rg - 1)),
    };
    let _ = writeln!(s, "  flank_region*({flank}).");

    // ---- resolutions ----
    s.push_str("\nresolutions\n");
    for ry in 0..rg {
        for rx in 0..rg {
            let x0 = rx * cells_per_region;
            let x1 = (rx + 1) * cells_per_region - 1;
            let y0 = ry * cells_per_region;
            let y1 = (ry + 1) * cells_per_region - 1;
            let _ = writeln!(s, "  region {} = ({x0}..{x1}, {y0}..{y1}).", region_name(rx, ry));
        }
    }
    s
}

/// Region grid coordinates of a continuous point.
pub fn region_of_point(cfg: &ScenarioConfig, x: f64, y: f64) -> (i64, i64) {
    let rg = cfg.region_grid as i64;
    let rx = ((x * cfg.region_grid as f64).floor() as i64).clamp(0, rg - 1);
    let ry = ((y * cfg.region_grid as f64).floor() as i64).clamp(0, rg - 1);
    (rx, ry)
}

/// Parse the generated document into a validated description.
pub fn fortattack_domain(cfg: &ScenarioConfig) -> Result<DomainDescription, ParseError> {
    parse_domain(&fortattack_domain_text(cfg))
}
