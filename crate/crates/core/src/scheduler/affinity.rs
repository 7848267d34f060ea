//! Worker-to-CPU placement.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Affinity {
    /// Leave placement to the OS.
    #[default]
    None,
    /// Spread workers evenly over physical cores.
    Scatter,
    /// Pack workers onto consecutive logical CPUs.
    Compact,
}

impl Affinity {
    pub const ALL: [Affinity; 3] = [Affinity::None, Affinity::Scatter, Affinity::Compact];

    pub fn name(self) -> &'static str {
        match self {
            Affinity::None => "none",
            Affinity::Scatter => "scatter",
            Affinity::Compact => "compact",
        }
    }
}

impl std::fmt::Display for Affinity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Affinity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Affinity::None),
            "scatter" => Ok(Affinity::Scatter),
            "compact" => Ok(Affinity::Compact),
            other => Err(format!("unknown affinity `{other}` (expected none, scatter or compact)")),
        }
    }
}

/// Machine topology used to place workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub physical_cores: usize,
    pub logical_cpus: usize,
}

impl Topology {
    pub fn detect() -> Self {
        let logical = std::thread::available_parallelism().map_or(1, |n| n.get());
        Topology {
            physical_cores: num_cpus::get_physical().clamp(1, logical),
            logical_cpus: logical,
        }
    }
}

/// CPU index for each of `threads` workers, or `None` when the policy leaves
/// placement to the OS.
///
/// Scatter puts worker `w` on core `(w * physical / threads) % physical`.
/// Compact puts worker `w` on logical CPU `w % logical`. Core `c` is taken to
/// be logical CPU `c`, which is how Linux numbers the first hardware thread of
/// each core.
pub fn affinity_plan(policy: Affinity, threads: usize, topo: Topology) -> Option<Vec<usize>> {
    match policy {
        Affinity::None => None,
        Affinity::Scatter => {
            let p = topo.physical_cores.max(1);
            Some((0..threads).map(|w| (w * p / threads) % p).collect())
        }
        Affinity::Compact => {
            let l = topo.logical_cpus.max(1);
            Some((0..threads).map(|w| w % l).collect())
        }
    }
}

/// Pins the calling thread to `cpu`. Returns false when the platform refuses.
#[cfg(target_os = "linux")]
pub fn pin_current_thread(cpu: usize) -> bool {
    // SAFETY: cpu_set_t is plain data; CPU_SET bounds-checks against its size.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        if cpu >= libc::CPU_SETSIZE as usize {
            return false;
        }
        libc::CPU_SET(cpu, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
pub fn pin_current_thread(_cpu: usize) -> bool {
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_spreads_over_cores() {
        let topo = Topology {
            physical_cores: 8,
            logical_cpus: 16,
        };
        assert_eq!(affinity_plan(Affinity::Scatter, 4, topo), Some(vec![0, 2, 4, 6]));
        assert_eq!(affinity_plan(Affinity::Scatter, 8, topo), Some((0..8).collect()));
    }

    #[test]
    fn compact_packs_logical_cpus() {
        let topo = Topology {
            physical_cores: 8,
            logical_cpus: 16,
        };
        assert_eq!(affinity_plan(Affinity::Compact, 2, topo), Some(vec![0, 1]));
        let small = Topology {
            physical_cores: 2,
            logical_cpus: 2,
        };
        assert_eq!(affinity_plan(Affinity::Compact, 4, small), Some(vec![0, 1, 0, 1]));
    }

    #[test]
    fn none_makes_no_plan() {
        assert_eq!(affinity_plan(Affinity::None, 4, Topology::detect()), None);
    }

    #[test]
    fn detected_topology_is_sane() {
        let t = Topology::detect();
        assert!(t.physical_cores >= 1 && t.physical_cores <= t.logical_cpus);
    }
}
