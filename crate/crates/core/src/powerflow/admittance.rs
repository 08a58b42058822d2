use num_complex::Complex64;

use crate::case::{Branch, Network};

/// Two-port admittances of a branch's pi model, with the tap on the from side.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BranchAdmittance {
    pub ff: Complex64,
    pub ft: Complex64,
    pub tf: Complex64,
    pub tt: Complex64,
}

impl BranchAdmittance {
    pub fn of(br: &Branch) -> Self {
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let charging = Complex64::new(0.0, br.b / 2.0);
        let tap = Complex64::from_polar(br.tap, br.shift_deg.to_radians());
        let ytt = ys + charging;
        Self {
            ff: ytt / (tap * tap.conj()),
            ft: -ys / tap.conj(),
            tf: -ys / tap,
            tt: ytt,
        }
    }
}

/// Sparse bus admittance matrix over a subset of buses, one sorted row per
/// bus. The diagonal is always present.
pub(crate) struct Ybus {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl Ybus {
    /// `local[i]` is the matrix index of bus row `i`, or `None` when the bus
    /// is excluded. Branches with an excluded end are skipped.
    pub fn build(net: &Network, local: &[Option<usize>], n: usize) -> Self {
        let index = net.bus_index();
        let mut rows: Vec<Vec<(usize, Complex64)>> =
            (0..n).map(|i| vec![(i, Complex64::new(0.0, 0.0))]).collect();
        let add = |rows: &mut Vec<Vec<(usize, Complex64)>>, r: usize, c: usize, y: Complex64| {
            let row = &mut rows[r];
            match row.iter_mut().find(|(col, _)| *col == c) {
                Some((_, v)) => *v += y,
                None => row.push((c, y)),
            }
        };

        for br in net.branches.iter().filter(|b| b.in_service) {
            let (Some(f), Some(t)) = (local[index[&br.from_bus]], local[index[&br.to_bus]]) else {
                continue;
            };
            let y = BranchAdmittance::of(br);
            add(&mut rows, f, f, y.ff);
            add(&mut rows, f, t, y.ft);
            add(&mut rows, t, f, y.tf);
            add(&mut rows, t, t, y.tt);
        }
        for (i, bus) in net.buses.iter().enumerate() {
            if let Some(k) = local[i] {
                let ysh = Complex64::new(bus.shunt_g, bus.shunt_b) / net.base_power;
                add(&mut rows, k, k, ysh);
            }
        }
        for row in &mut rows {
            row.sort_by_key(|(c, _)| *c);
        }
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    /// Injected currents `Y * v`.
    pub fn mul(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, y)| y * v[c]).sum())
            .collect()
    }
}
