//! CSV and JSON emission. Both formats share one column list so their field
//! names never drift apart.

use serde_json::{Map, Number, Value};

use crate::analysis::{SweepRow, SweepTable, Threshold};
use crate::equilibrium::{self, EquilibriumResult};
use crate::model::Sp;
use crate::scenario::Mode;

/// Per-result columns, in output order (after the leading `W`).
pub const RESULT_COLUMNS: [&str; 18] = [
    "x1_a", "x1_ab", "x2_ab", "x2_b", "p_a", "p_ab", "p_b", "l_a", "l_ab", "l_b", "r1", "r2",
    "cs_a", "cs_ab", "cs_b", "cs_total", "welfare", "regime",
];

enum Field {
    Num(f64),
    Text(&'static str),
}

fn fields(r: &EquilibriumResult) -> [Field; 18] {
    let (a, o) = (&r.alloc, &r.outcome);
    use Field::Num;
    [
        Num(a.x1_a),
        Num(a.x1_ab),
        Num(a.x2_ab),
        Num(a.x2_b),
        Num(o.p_a),
        Num(o.p_ab),
        Num(o.p_b),
        Num(o.l_a),
        Num(o.l_ab),
        Num(o.l_b),
        Num(o.r1),
        Num(o.r2),
        Num(o.cs_a),
        Num(o.cs_ab),
        Num(o.cs_b),
        Num(o.cs_total),
        Num(o.welfare),
        Field::Text(r.regime.label()),
    ]
}

/// Shortest decimal that parses back to the same double; `-0` prints as `0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn csv_field(f: &Field) -> String {
    match f {
        Field::Num(v) => format_number(*v),
        Field::Text(s) => (*s).to_string(),
    }
}

fn json_number(v: f64) -> Value {
    let v = if v == 0.0 { 0.0 } else { v };
    Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn json_field(f: &Field) -> Value {
    match f {
        Field::Num(v) => json_number(*v),
        Field::Text(s) => Value::String((*s).into()),
    }
}

pub fn csv_header(mode: Mode) -> String {
    let mut cols: Vec<String> = vec!["W".into()];
    cols.extend(RESULT_COLUMNS.iter().map(|c| c.to_string()));
    if mode == Mode::Both {
        cols.extend(RESULT_COLUMNS.iter().map(|c| format!("coop_{c}")));
    }
    cols.join(",")
}

fn cooperation_of(row: &SweepRow) -> EquilibriumResult {
    row.cooperation.unwrap_or_else(|| {
        equilibrium::solve_cooperation(&row.competition.cfg)
            .expect("cooperation profile is feasible for any valid market")
    })
}

/// Header line plus one line per row, LF-terminated. In `cooperation` mode
/// the main columns carry the cooperation results; in `both` mode they carry
/// competition and `coop_*` columns follow.
pub fn emit_sweep_csv(table: &SweepTable, mode: Mode) -> Vec<u8> {
    let mut out = csv_header(mode);
    out.push('\n');
    for row in &table.rows {
        let mut line = vec![format_number(row.w)];
        let main = match mode {
            Mode::Cooperation => cooperation_of(row),
            _ => row.competition,
        };
        line.extend(fields(&main).iter().map(csv_field));
        if mode == Mode::Both {
            line.extend(fields(&cooperation_of(row)).iter().map(csv_field));
        }
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn insert_result(map: &mut Map<String, Value>, prefix: &str, r: &EquilibriumResult) {
    for (name, f) in RESULT_COLUMNS.iter().zip(fields(r).iter()) {
        map.insert(format!("{prefix}{name}"), json_field(f));
    }
    map.insert(
        format!("{prefix}method"),
        Value::String(r.method.label().into()),
    );
    map.insert(format!("{prefix}residual"), json_number(r.residual));
    map.insert(format!("{prefix}iterations"), Value::from(r.iterations));
}

/// Flat JSON object for a single solve: the CSV columns plus `method`,
/// `residual` and `iterations`, with `coop_`-prefixed mirrors when a
/// cooperation result is supplied.
pub fn solve_json(primary: &EquilibriumResult, cooperation: Option<&EquilibriumResult>) -> String {
    let mut map = Map::new();
    map.insert("W".into(), json_number(primary.cfg.w()));
    insert_result(&mut map, "", primary);
    if let Some(c) = cooperation {
        insert_result(&mut map, "coop_", c);
    }
    serde_json::to_string_pretty(&Value::Object(map)).expect("JSON values are finite")
}

/// `SP1: 0.200000 SP2: 0.200000`, with `none` for a provider that never
/// enters within the sweep.
pub fn format_thresholds(thresholds: &[Threshold]) -> String {
    [Sp::One, Sp::Two]
        .iter()
        .map(|&sp| match thresholds.iter().find(|t| t.sp == sp) {
            Some(t) => format!("{sp}: {:.6}", t.w),
            None => format!("{sp}: none"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{sweep, SweepSpec};
    use crate::model::MarketConfig;

    fn table(rows: usize) -> SweepTable {
        let sizes = MarketConfig::new(0.4, 0.2, 0.4, 1.0).unwrap();
        let spec = if rows == 0 {
            return SweepTable {
                rows: vec![],
                thresholds: vec![],
            };
        } else {
            SweepSpec::new(sizes, 0.3, 0.3 + 0.1 * (rows - 1) as f64, 0.1, true).unwrap()
        };
        sweep(&spec).unwrap()
    }

    #[test]
    fn header_only_for_empty_table() {
        let csv = String::from_utf8(emit_sweep_csv(&table(0), Mode::Competition)).unwrap();
        assert_eq!(csv, format!("{}\n", csv_header(Mode::Competition)));
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn single_row_has_two_lines() {
        let csv = String::from_utf8(emit_sweep_csv(&table(1), Mode::Both)).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.ends_with('\n'));
        let cols: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(cols.len(), 1 + 2 * RESULT_COLUMNS.len());
        assert_eq!(cols[0], "0.3");
    }

    #[test]
    fn output_is_deterministic() {
        let t = table(3);
        assert_eq!(
            emit_sweep_csv(&t, Mode::Both),
            emit_sweep_csv(&t, Mode::Both)
        );
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-17, 123456.789, -0.0, 2.0_f64.powi(-40)] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), if v == 0.0 { 0.0 } else { v });
            assert!(!s.starts_with('-') || v < 0.0);
        }
    }

    #[test]
    fn threshold_line() {
        let t = [
            Threshold {
                sp: Sp::One,
                w: 0.2000001,
            },
            Threshold {
                sp: Sp::Two,
                w: 0.19999996,
            },
        ];
        assert_eq!(format_thresholds(&t), "SP1: 0.200000 SP2: 0.200000");
        assert_eq!(format_thresholds(&[]), "SP1: none SP2: none");
    }

    #[test]
    fn json_field_order_follows_columns() {
        let c = MarketConfig::new(0.4, 0.2, 0.4, 0.4).unwrap();
        let r = crate::equilibrium::solve_numeric(&c).unwrap();
        let json = solve_json(&r, None);
        let v: Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys[0], "W");
        assert_eq!(keys[1], "x1_a");
        assert_eq!(keys[18], "regime");
        assert_eq!(keys[19..], ["method", "residual", "iterations"]);
    }
}
