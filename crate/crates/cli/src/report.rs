//! Run reports and their table / JSON / CSV renderings.

use serde::Serialize;

use qutrit_core::DoubletReadout;

/// |observed − expected| / max(1, |expected|).
pub fn relative_error(observed: f64, expected: f64) -> f64 {
    (observed - expected).abs() / f64::max(1.0, expected.abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct ReadoutRecord {
    pub i12: f64,
    pub i01: f64,
    pub mode: String,
    pub tip_deg: f64,
}

impl From<&DoubletReadout> for ReadoutRecord {
    fn from(r: &DoubletReadout) -> Self {
        Self {
            i12: r.i12,
            i01: r.i01,
            mode: r.mode.as_str().to_string(),
            tip_deg: r.tip_deg(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Expectation {
    pub i12: f64,
    pub i01: f64,
    pub rel_err_i12: f64,
    pub rel_err_i01: f64,
}

/// Everything one simulation run reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub mode: String,
    pub dt_s: f64,
    pub splitting_hz: f64,
    pub initial_populations: [f64; 3],
    pub final_populations: [f64; 3],
    pub readout: ReadoutRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expectation>,
}

impl RunReport {
    pub fn assert_finite(&self) {
        let mut values = vec![self.dt_s, self.splitting_hz];
        values.extend(self.initial_populations);
        values.extend(self.final_populations);
        values.extend([self.readout.i12, self.readout.i01, self.readout.tip_deg]);
        if let Some(e) = &self.expected {
            values.extend([e.i12, e.i01, e.rel_err_i12, e.rel_err_i01]);
        }
        assert!(
            values.iter().all(|v| v.is_finite()),
            "report contains non-finite values"
        );
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let p = |v: [f64; 3]| format!("({:+.4}, {:+.4}, {:+.4})", v[0], v[1], v[2]);
        out.push_str(&format!("run        : {}\n", self.name));
        out.push_str(&format!(
            "mode       : {} pulses, {} readout (tip {}°)\n",
            self.mode, self.readout.mode, self.readout.tip_deg
        ));
        out.push_str(&format!(
            "system     : splitting {} Hz, dt {:e} s\n",
            self.splitting_hz, self.dt_s
        ));
        out.push_str(&format!(
            "populations: {} -> {}\n",
            p(self.initial_populations),
            p(self.final_populations)
        ));
        out.push_str(&format!(
            "readout    : i12 = {:+.6}, i01 = {:+.6}\n",
            self.readout.i12, self.readout.i01
        ));
        if let Some(e) = &self.expected {
            out.push_str(&format!(
                "expected   : i12 = {:+.6}, i01 = {:+.6}\n",
                e.i12, e.i01
            ));
            out.push_str(&format!(
                "rel error  : i12 = {:.2e}, i01 = {:.2e}\n",
                e.rel_err_i12, e.rel_err_i01
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec![
            "name",
            "mode",
            "dt_s",
            "splitting_hz",
            "p0_initial",
            "p1_initial",
            "p2_initial",
            "p0_final",
            "p1_final",
            "p2_final",
            "i12",
            "i01",
            "readout_mode",
            "tip_deg",
        ];
        let mut row = vec![
            self.name.clone(),
            self.mode.clone(),
            format!("{}", self.dt_s),
            format!("{}", self.splitting_hz),
            format!("{:.9}", self.initial_populations[0]),
            format!("{:.9}", self.initial_populations[1]),
            format!("{:.9}", self.initial_populations[2]),
            format!("{:.9}", self.final_populations[0]),
            format!("{:.9}", self.final_populations[1]),
            format!("{:.9}", self.final_populations[2]),
            format!("{:.9}", self.readout.i12),
            format!("{:.9}", self.readout.i01),
            self.readout.mode.clone(),
            format!("{}", self.readout.tip_deg),
        ];
        if let Some(e) = &self.expected {
            header.extend(["expected_i12", "expected_i01", "rel_err_i12", "rel_err_i01"]);
            row.extend([
                format!("{:.9}", e.i12),
                format!("{:.9}", e.i01),
                format!("{:.3e}", e.rel_err_i12),
                format!("{:.3e}", e.rel_err_i01),
            ]);
        }
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

/// One row of the verification table.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub expected_i12: f64,
    pub expected_i01: f64,
    pub observed_i12: f64,
    pub observed_i01: f64,
    pub rel_err_i12: f64,
    pub rel_err_i01: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub mode: String,
    pub tolerance: f64,
    pub rows: Vec<VerifyRow>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verification ({} mode, per-line tolerance {:.1e})\n",
            self.mode, self.tolerance
        ));
        out.push_str(&format!(
            "{:<12} {:>16} {:>20} {:>11} {:>11}  result\n",
            "target", "expected", "observed", "err(i12)", "err(i01)"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<12} {:>7.2}:{:<8.2} {:>9.4}:{:<10.4} {:>11.3e} {:>11.3e}  {}\n",
                r.name,
                r.expected_i12,
                r.expected_i01,
                r.observed_i12,
                r.observed_i01,
                r.rel_err_i12,
                r.rel_err_i01,
                if r.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "{}/{} targets pass\n",
            self.rows.iter().filter(|r| r.pass).count(),
            self.rows.len()
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "name,expected_i12,expected_i01,observed_i12,observed_i01,rel_err_i12,rel_err_i01,pass\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.9},{:.9},{:.3e},{:.3e},{}\n",
                r.name,
                r.expected_i12,
                r.expected_i01,
                r.observed_i12,
                r.observed_i01,
                r.rel_err_i12,
                r.rel_err_i01,
                r.pass
            ));
        }
        out
    }
}
