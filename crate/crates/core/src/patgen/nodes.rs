use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PatgenError, CTRL_LINES};

/// Maps node names to control-bus bit indices (0..48).
///
/// The default table follows the quantum-core floor plan: 32 CDAC clocks
/// (`IU1`..`IU16` above the array, `ID1`..`ID16` below) on bits 0..31, and the
/// two CDS sample switches of each of the 8 detectors (`DET<k>_S0`,
/// `DET<k>_S1`) on bits 32..47.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, u8>", into = "BTreeMap<String, u8>")]
pub struct NodeTable {
    by_name: BTreeMap<String, u8>,
    by_bit: BTreeMap<u8, String>,
}

impl NodeTable {
    pub fn from_map(map: BTreeMap<String, u8>) -> Result<Self, PatgenError> {
        let mut by_bit = BTreeMap::new();
        for (name, &bit) in &map {
            if bit >= CTRL_LINES {
                return Err(PatgenError::NodeTable(format!(
                    "node `{name}` uses bit {bit}; control bus has {CTRL_LINES} lines"
                )));
            }
            if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == ',' || c == '#') {
                return Err(PatgenError::NodeTable(format!("invalid node name `{name}`")));
            }
            if let Some(prev) = by_bit.insert(bit, name.clone()) {
                return Err(PatgenError::NodeTable(format!(
                    "nodes `{prev}` and `{name}` share bit {bit}"
                )));
            }
        }
        Ok(Self {
            by_name: map,
            by_bit,
        })
    }

    pub fn bit(&self, name: &str) -> Option<u8> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, bit: u8) -> Option<&str> {
        self.by_bit.get(&bit).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u8)> {
        self.by_name.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl Default for NodeTable {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for i in 0..16u8 {
            map.insert(format!("IU{}", i + 1), i);
            map.insert(format!("ID{}", i + 1), 16 + i);
        }
        for det in 0..8u8 {
            map.insert(format!("DET{det}_S0"), 32 + 2 * det);
            map.insert(format!("DET{det}_S1"), 33 + 2 * det);
        }
        Self::from_map(map).expect("default node table is valid")
    }
}

impl TryFrom<BTreeMap<String, u8>> for NodeTable {
    type Error = PatgenError;

    fn try_from(map: BTreeMap<String, u8>) -> Result<Self, Self::Error> {
        Self::from_map(map)
    }
}

impl From<NodeTable> for BTreeMap<String, u8> {
    fn from(t: NodeTable) -> Self {
        t.by_name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_fills_control_bus() {
        let t = NodeTable::default();
        assert_eq!(t.len(), 48);
        assert_eq!(t.bit("IU1"), Some(0));
        assert_eq!(t.bit("ID16"), Some(31));
        assert_eq!(t.bit("DET7_S1"), Some(47));
        assert_eq!(t.name(34), Some("DET1_S0"));
    }

    #[test]
    fn rejects_shared_bits_and_wide_bits() {
        let mut m = BTreeMap::new();
        m.insert("A".to_string(), 3);
        m.insert("B".to_string(), 3);
        assert!(NodeTable::from_map(m).is_err());
        let mut m = BTreeMap::new();
        m.insert("A".to_string(), 48);
        assert!(NodeTable::from_map(m).is_err());
    }
}
