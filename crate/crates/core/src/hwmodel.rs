//! Analytic FPGA cost and throughput model.
//!
//! Per-operation LUT/DSP costs (synthesis averages per precision) combine
//! with a device's resource budget into an average cost fraction `C_avg`:
//! the share of the device one fundamental operation (MAC, or XNOR/popcount
//! for binary) occupies. `C_avg` folds into clock cycles, giving frames/s
//! for a topology, and its reciprocal is the compute roof of a roofline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantize::Precision;
use crate::topology::TopologySpec;

pub const HW_TABLE_VERSION: u32 = 1;

/// Resource budget of a target device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub name: String,
    pub luts_total: u64,
    pub dsps_total: u64,
    /// Fraction of LUTs usable for arithmetic.
    pub lut_usage: f64,
    /// Fraction of DSPs usable for arithmetic.
    pub dsp_usage: f64,
    pub clock_hz: f64,
}

impl DeviceSpec {
    /// Xilinx Kintex UltraScale 115 at 250 MHz.
    pub fn ku115() -> DeviceSpec {
        DeviceSpec {
            name: "ku115".into(),
            luts_total: 663_360,
            dsps_total: 5_520,
            lut_usage: 0.7,
            dsp_usage: 1.0,
            clock_hz: 250e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.luts_total == 0 || self.dsps_total == 0 {
            return Err(Error::arg("device resource totals must be positive"));
        }
        for (name, usage) in [("lut_usage", self.lut_usage), ("dsp_usage", self.dsp_usage)] {
            if !(usage > 0.0 && usage <= 1.0) {
                return Err(Error::arg(format!("{name} must lie in (0, 1], got {usage}")));
            }
        }
        if !(self.clock_hz > 0.0) {
            return Err(Error::arg("clock_hz must be positive"));
        }
        Ok(())
    }

    pub fn lut_budget(&self) -> f64 {
        self.lut_usage * self.luts_total as f64
    }

    pub fn dsp_budget(&self) -> f64 {
        self.dsp_usage * self.dsps_total as f64
    }
}

/// Synthesis cost spread for one resource (control-logic sharing makes the
/// per-op cost depend on the parallelism tried).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceCost {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
}

impl ResourceCost {
    pub fn flat(value: f64) -> ResourceCost {
        ResourceCost {
            min: value,
            avg: value,
            max: value,
        }
    }

    fn pick(&self, mode: CostMode) -> f64 {
        match mode {
            CostMode::Optimistic => self.min,
            CostMode::Average => self.avg,
            CostMode::Pessimistic => self.max,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.min < 0.0 || self.avg < 0.0 || self.max < 0.0 {
            return Err(Error::arg(format!("{what} costs must be non-negative")));
        }
        if self.min > self.avg || self.avg > self.max {
            return Err(Error::arg(format!(
                "{what} costs must satisfy min <= avg <= max"
            )));
        }
        Ok(())
    }
}

/// LUTs and DSPs consumed by one fundamental operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpCost {
    pub luts: ResourceCost,
    pub dsps: ResourceCost,
}

impl OpCost {
    pub fn validate(&self) -> Result<()> {
        self.luts.validate("LUT")?;
        self.dsps.validate("DSP")
    }
}

/// Which end of the synthesis spread to price with. Paper-matching outputs
/// use [`CostMode::Average`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    Optimistic,
    #[default]
    Average,
    Pessimistic,
}

impl std::str::FromStr for CostMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<CostMode> {
        match s {
            "optimistic" | "min" => Ok(CostMode::Optimistic),
            "average" | "avg" => Ok(CostMode::Average),
            "pessimistic" | "max" => Ok(CostMode::Pessimistic),
            other => Err(Error::arg(format!(
                "unknown cost mode '{other}' (expected optimistic|average|pessimistic)"
            ))),
        }
    }
}

impl std::fmt::Display for CostMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostMode::Optimistic => "optimistic",
            CostMode::Average => "average",
            CostMode::Pessimistic => "pessimistic",
        })
    }
}

/// Per-precision operation costs, keyed by canonical precision name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostTable {
    entries: BTreeMap<String, OpCost>,
}

impl CostTable {
    /// Synthesis-report costs for the six studied precisions.
    pub fn builtin() -> CostTable {
        let mut entries = BTreeMap::new();
        let mut put = |name: &str, luts: ResourceCost, dsps: ResourceCost| {
            entries.insert(name.to_string(), OpCost { luts, dsps });
        };
        let spread = |min, avg, max| ResourceCost { min, avg, max };
        put("binary", spread(4.24, 5.58, 8.00), ResourceCost::flat(0.0));
        put("int2", spread(10.98, 13.52, 18.74), ResourceCost::flat(0.0));
        put("int4", spread(27.18, 30.06, 35.56), ResourceCost::flat(0.0));
        put("int8", spread(83.28, 86.38, 91.92), ResourceCost::flat(0.0));
        put("int16", spread(21.64, 28.66, 38.36), ResourceCost::flat(1.0));
        put("fp32", ResourceCost::flat(356.0), ResourceCost::flat(4.0));
        CostTable { entries }
    }

    pub fn get(&self, precision: Precision) -> Result<&OpCost> {
        let key = precision.to_string();
        self.entries
            .get(&key)
            .ok_or(Error::UnknownPrecision(key))
    }

    pub fn insert(&mut self, precision: Precision, cost: OpCost) {
        self.entries.insert(precision.to_string(), cost);
    }

    pub fn precisions(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, cost) in &self.entries {
            name.parse::<Precision>()?;
            cost.validate()
                .map_err(|e| Error::arg(format!("cost entry '{name}': {e}")))?;
        }
        Ok(())
    }
}

/// Device plus cost table, the unit the estimators work against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareModel {
    pub device: DeviceSpec,
    pub costs: CostTable,
}

impl Default for HardwareModel {
    fn default() -> HardwareModel {
        HardwareModel {
            device: DeviceSpec::ku115(),
            costs: CostTable::builtin(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HwFile {
    version: u32,
    device: DeviceSpec,
    costs: CostTable,
}

impl HardwareModel {
    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.costs.validate()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(&HwFile {
            version: HW_TABLE_VERSION,
            device: self.device.clone(),
            costs: self.costs.clone(),
        })
        .map_err(|e| Error::data(format!("hardware table encode: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<HardwareModel> {
        let file: HwFile =
            toml::from_str(text).map_err(|e| Error::data(format!("hardware table parse: {e}")))?;
        if file.version == 0 || file.version > HW_TABLE_VERSION {
            return Err(Error::VersionMismatch {
                found: file.version,
                supported: HW_TABLE_VERSION,
            });
        }
        let model = HardwareModel {
            device: file.device,
            costs: file.costs,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<HardwareModel> {
        HardwareModel::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_toml()?)?)
    }

    pub fn c_avg(&self, precision: Precision) -> Result<f64> {
        Ok(c_avg(self.costs.get(precision)?, &self.device))
    }

    pub fn c_for_mode(&self, precision: Precision, mode: CostMode) -> Result<f64> {
        Ok(c_for_mode(self.costs.get(precision)?, &self.device, mode))
    }

    pub fn c_rel(&self, precision: Precision, baseline: Precision) -> Result<f64> {
        c_rel(precision, baseline, &self.costs, &self.device)
    }

    pub fn compute_roof(&self, precision: Precision) -> Result<f64> {
        compute_roof(&self.device, precision, &self.costs)
    }

    /// Full estimate for one (topology, weight precision) design point.
    pub fn estimate(
        &self,
        topology: &TopologySpec,
        precision: Precision,
        delta: f64,
        mode: CostMode,
    ) -> Result<HwEstimate> {
        let cost = c_for_mode(self.costs.get(precision)?, &self.device, mode);
        let num_ops = topology.count_ops();
        let bits = memory_bits(topology, precision);
        Ok(HwEstimate {
            precision: precision.to_string(),
            cost_mode: mode,
            num_ops,
            num_params: topology.count_params(),
            c_avg: cost,
            c_rel: c_rel_with(cost, self.c_avg(Precision::Binary)?),
            throughput_fps: throughput_fps(num_ops, cost, self.device.clock_hz, delta)?,
            memory_bits: bits,
            memory_megabits: bits as f64 / 1e6,
            memory_saving: memory_saving(precision),
            compute_roof: roof_from(self.device.clock_hz, cost)?,
        })
    }
}

/// Hardware summary for one design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwEstimate {
    pub precision: String,
    pub cost_mode: CostMode,
    pub num_ops: u64,
    pub num_params: u64,
    pub c_avg: f64,
    pub c_rel: f64,
    pub throughput_fps: f64,
    pub memory_bits: u64,
    pub memory_megabits: f64,
    pub memory_saving: f64,
    pub compute_roof: f64,
}

/// Fraction of the device one operation occupies: the binding resource wins.
pub fn c_avg(cost: &OpCost, dev: &DeviceSpec) -> f64 {
    c_for_mode(cost, dev, CostMode::Average)
}

pub fn c_for_mode(cost: &OpCost, dev: &DeviceSpec, mode: CostMode) -> f64 {
    let lut_term = cost.luts.pick(mode) / dev.lut_budget();
    let dsp_term = cost.dsps.pick(mode) / dev.dsp_budget();
    lut_term.max(dsp_term)
}

pub fn c_rel(
    precision: Precision,
    baseline: Precision,
    table: &CostTable,
    dev: &DeviceSpec,
) -> Result<f64> {
    Ok(c_rel_with(
        c_avg(table.get(precision)?, dev),
        c_avg(table.get(baseline)?, dev),
    ))
}

fn c_rel_with(c: f64, c_baseline: f64) -> f64 {
    c / c_baseline
}

/// Frames per second: clock cycles folded by per-op cost over #OP per frame.
pub fn throughput_fps(num_ops: u64, c_avg_val: f64, clock_hz: f64, delta: f64) -> Result<f64> {
    if num_ops == 0 {
        return Err(Error::arg("throughput needs at least one operation"));
    }
    let denom = num_ops as f64 * c_avg_val + delta;
    if denom <= 0.0 {
        return Err(Error::Compute(format!(
            "non-positive throughput denominator {denom}"
        )));
    }
    Ok(clock_hz / denom)
}

/// Weight storage for a topology at a given precision.
pub fn memory_bits(topology: &TopologySpec, weight_precision: Precision) -> u64 {
    topology.count_params() * weight_precision.bit_width() as u64
}

/// Storage factor saved versus 32-bit floats.
pub fn memory_saving(precision: Precision) -> f64 {
    32.0 / precision.bit_width() as f64
}

/// Peak ops/s when compute-bound: the flat roof of the roofline.
pub fn compute_roof(dev: &DeviceSpec, precision: Precision, table: &CostTable) -> Result<f64> {
    roof_from(dev.clock_hz, c_avg(table.get(precision)?, dev))
}

fn roof_from(clock_hz: f64, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Compute(
            "compute roof undefined for zero-cost operations".into(),
        ));
    }
    Ok(clock_hz / c)
}

/// Attainable ops/s at a given arithmetic intensity (ops per byte moved).
/// Without a bandwidth figure the flat compute roof is returned.
pub fn roofline(
    dev: &DeviceSpec,
    precision: Precision,
    table: &CostTable,
    intensity_ops_per_byte: f64,
    bandwidth_bytes_per_s: Option<f64>,
) -> Result<f64> {
    let roof = compute_roof(dev, precision, table)?;
    match bandwidth_bytes_per_s {
        Some(bw) if bw > 0.0 => Ok(roof.min(bw * intensity_ops_per_byte)),
        Some(bw) => Err(Error::arg(format!("bandwidth must be positive, got {bw}"))),
        None => Ok(roof),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::reference_fc;

    fn model() -> HardwareModel {
        HardwareModel::default()
    }

    // Paper-reported C_avg column, 4 significant figures.
    const REPORTED_C_AVG: [(&str, f64); 6] = [
        ("binary", 12.02e-6),
        ("int2", 29.12e-6),
        ("int4", 64.76e-6),
        ("int8", 186.02e-6),
        ("int16", 181.16e-6),
        ("fp32", 766.6e-6),
    ];

    const REPORTED_C_REL: [(&str, f64); 6] = [
        ("binary", 1.0),
        ("int2", 2.42),
        ("int4", 5.39),
        ("int8", 15.48),
        ("int16", 15.07),
        ("fp32", 63.79),
    ];

    #[test]
    fn c_avg_reproduces_reported_column_to_four_figures() {
        let m = model();
        for (name, reported) in REPORTED_C_AVG {
            let got = m.c_avg(name.parse().unwrap()).unwrap();
            let rel = (got - reported).abs() / reported;
            assert!(
                rel <= 5e-4,
                "{name}: computed {got:.6e} vs reported {reported:.6e} (rel {rel:.2e})"
            );
        }
    }

    #[test]
    fn c_avg_exact_arithmetic() {
        let m = model();
        let lut_budget = 0.7 * 663_360.0;
        let exact = 5.58 / lut_budget;
        assert!((m.c_avg(Precision::Binary).unwrap() - exact).abs() < 1e-18);
        // INT16 is DSP-bound: 1/5520 beats 28.66/464352.
        let int16 = m.c_avg("int16".parse().unwrap()).unwrap();
        assert_eq!(int16, 1.0 / 5_520.0);
        assert!(28.66 / lut_budget < int16);
    }

    #[test]
    fn c_rel_reproduces_reported_column() {
        let m = model();
        for (name, reported) in REPORTED_C_REL {
            let got = m.c_rel(name.parse().unwrap(), Precision::Binary).unwrap();
            assert!(
                (got - reported).abs() <= 0.01,
                "{name}: c_rel {got:.4} vs reported {reported}"
            );
        }
    }

    #[test]
    fn int16_costs_less_than_int8() {
        let m = model();
        let int16 = m.c_avg("int16".parse().unwrap()).unwrap();
        let int8 = m.c_avg("int8".parse().unwrap()).unwrap();
        assert!(int16 < int8);
    }

    #[test]
    fn throughput_matches_reported_reference_numbers() {
        let m = model();
        let topo = reference_fc(1.0).unwrap();
        let ops = topo.count_ops() as u64;
        assert_eq!(ops, 36_806_656);

        let binary = throughput_fps(ops, m.c_avg(Precision::Binary).unwrap(), 250e6, 0.0).unwrap();
        assert!(
            (binary - 565_070.0).abs() / 565_070.0 < 1e-3,
            "binary reference throughput {binary:.0} FPS"
        );

        let fp32 = throughput_fps(ops, m.c_avg(Precision::Float32).unwrap(), 250e6, 0.0).unwrap();
        assert!((fp32 - 8_860.0).abs() / 8_860.0 < 1e-3, "fp32 {fp32:.0} FPS");
    }

    #[test]
    fn throughput_ratio_is_inverse_c_rel_exactly() {
        let m = model();
        let ops = 123_456;
        let binary = throughput_fps(ops, m.c_avg(Precision::Binary).unwrap(), 250e6, 0.0).unwrap();
        for (name, _) in REPORTED_C_AVG {
            let p: Precision = name.parse().unwrap();
            let t = throughput_fps(ops, m.c_avg(p).unwrap(), 250e6, 0.0).unwrap();
            let ratio = binary / t;
            let rel = m.c_rel(p, Precision::Binary).unwrap();
            assert!(
                (ratio - rel).abs() / rel < 1e-12,
                "{name}: throughput ratio {ratio} vs c_rel {rel}"
            );
        }
    }

    #[test]
    fn throughput_monotonicity_and_errors() {
        let c = 1e-5;
        let t1 = throughput_fps(1000, c, 250e6, 0.0).unwrap();
        let t2 = throughput_fps(2000, c, 250e6, 0.0).unwrap();
        assert!((t1 / t2 - 2.0).abs() < 1e-12, "doubling ops halves fps");
        let with_delta = throughput_fps(1000, c, 250e6, 5.0).unwrap();
        assert!(with_delta < t1);
        assert!(throughput_fps(0, c, 250e6, 0.0).is_err());
        assert!(throughput_fps(1000, 0.0, 250e6, 0.0).is_err());
    }

    #[test]
    fn memory_footprint_matches_reported_numbers() {
        let full = reference_fc(1.0).unwrap();
        let bits = memory_bits(&full, Precision::Binary);
        assert_eq!(bits, 36_806_656);
        // Reported as 37.0 Mb.
        assert!((bits as f64 / 1e6 - 37.0).abs() < 0.5);

        let eighth = reference_fc(0.125).unwrap();
        let fp32_bits = memory_bits(&eighth, Precision::Float32);
        assert_eq!(fp32_bits, 29_786_112);
        assert!((fp32_bits as f64 / 1e6 - 29.8).abs() < 0.1);

        let empty = TopologySpec {
            name: "empty".into(),
            input_shape: vec![4],
            num_classes: 0,
            layers: vec![],
        };
        assert_eq!(memory_bits(&empty, Precision::Binary), 0);
    }

    #[test]
    fn memory_savings_match_reported_row() {
        let expected = [
            ("binary", 32.0),
            ("int2", 16.0),
            ("int4", 8.0),
            ("int8", 4.0),
            ("int16", 2.0),
            ("fp32", 1.0),
        ];
        for (name, saving) in expected {
            assert_eq!(memory_saving(name.parse().unwrap()), saving);
        }
    }

    #[test]
    fn compute_roofs_are_strictly_ordered() {
        let m = model();
        let roofs: Vec<f64> = ["binary", "int2", "int4", "int16", "int8", "fp32"]
            .iter()
            .map(|p| m.compute_roof(p.parse().unwrap()).unwrap())
            .collect();
        for pair in roofs.windows(2) {
            assert!(pair[0] > pair[1], "roofs out of order: {roofs:?}");
        }
        assert!((roofs[0] - 2.08e13).abs() / 2.08e13 < 1e-3);
        assert!((roofs[5] - 3.26e11).abs() / 3.26e11 < 1e-3);
    }

    #[test]
    fn roofline_switches_between_bandwidth_and_compute_bound() {
        let m = model();
        let table = &m.costs;
        let roof = compute_roof(&m.device, Precision::Binary, table).unwrap();
        let bw = 10e9;
        let low = roofline(&m.device, Precision::Binary, table, 1.0, Some(bw)).unwrap();
        assert_eq!(low, bw);
        let high = roofline(&m.device, Precision::Binary, table, 1e12, Some(bw)).unwrap();
        assert_eq!(high, roof);
        let none = roofline(&m.device, Precision::Binary, table, 1.0, None).unwrap();
        assert_eq!(none, roof);
        assert!(roofline(&m.device, Precision::Binary, table, 1.0, Some(0.0)).is_err());
    }

    #[test]
    fn cost_modes_order_the_estimate() {
        let m = model();
        for (name, _) in REPORTED_C_AVG {
            let p: Precision = name.parse().unwrap();
            let opt = m.c_for_mode(p, CostMode::Optimistic).unwrap();
            let avg = m.c_for_mode(p, CostMode::Average).unwrap();
            let pes = m.c_for_mode(p, CostMode::Pessimistic).unwrap();
            assert!(opt <= avg && avg <= pes, "{name}: {opt} {avg} {pes}");
        }
    }

    #[test]
    fn estimate_bundles_consistent_numbers() {
        let m = model();
        let topo = reference_fc(0.125).unwrap();
        let est = m
            .estimate(&topo, "int4".parse().unwrap(), 0.0, CostMode::Average)
            .unwrap();
        assert_eq!(est.num_params, 930_816);
        assert_eq!(est.num_ops, 930_816);
        assert_eq!(est.memory_bits, 930_816 * 4);
        assert!((est.memory_megabits - est.memory_bits as f64 / 1e6).abs() < 1e-12);
        assert_eq!(est.memory_saving, 8.0);
        let direct =
            throughput_fps(est.num_ops, est.c_avg, m.device.clock_hz, 0.0).unwrap();
        assert_eq!(est.throughput_fps, direct);
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let m = model();
        let text = m.to_toml().unwrap();
        let back = HardwareModel::from_toml(&text).unwrap();
        assert_eq!(back, m);

        let bad_version = text.replacen("version = 1", "version = 9", 1);
        assert!(matches!(
            HardwareModel::from_toml(&bad_version),
            Err(Error::VersionMismatch { .. })
        ));

        let bad_usage = text.replacen("lut_usage = 0.7", "lut_usage = 1.5", 1);
        assert!(HardwareModel::from_toml(&bad_usage).is_err());
    }

    #[test]
    fn unknown_precision_is_an_error() {
        let m = model();
        let custom: Precision = "fixed7.3".parse().unwrap();
        assert!(matches!(
            m.c_avg(custom),
            Err(Error::UnknownPrecision(_))
        ));
    }

    #[test]
    fn custom_table_entries_are_usable() {
        let mut m = model();
        let p: Precision = "fixed7.3".parse().unwrap();
        m.costs.insert(
            p,
            OpCost {
                luts: ResourceCost::flat(50.0),
                dsps: ResourceCost::flat(0.0),
            },
        );
        let c = m.c_avg(p).unwrap();
        assert!((c - 50.0 / (0.7 * 663_360.0)).abs() < 1e-18);
    }
}
