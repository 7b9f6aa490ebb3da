//! Unicode variation selectors and default-ignorable code points.
//!
//! The injector's canonical noise alphabet is the 256 variation selectors:
//! VS-1..VS-16 at U+FE00..U+FE0F followed by VS-17..VS-256 at
//! U+E0100..U+E01EF. Inputs that already carry default-ignorable scalars
//! are rejected before injection so that stripping stays a true inverse.

/// Number of variation selectors in the canonical alphabet.
pub const VS_TOTAL: u16 = 256;

const VS_BASIC_START: u32 = 0xFE00;
const VS_BASIC_END: u32 = 0xFE0F;
const VS_SUPP_START: u32 = 0xE0100;
const VS_SUPP_END: u32 = 0xE01EF;

/// The variation selector at canonical index `k` (0-based, `k < 256`).
pub fn vs_scalar(k: u16) -> char {
    assert!(k < VS_TOTAL, "variation selector index out of range: {k}");
    let cp = if k < 16 {
        VS_BASIC_START + u32::from(k)
    } else {
        VS_SUPP_START + u32::from(k) - 16
    };
    char::from_u32(cp).expect("VS ranges contain no surrogates")
}

/// Canonical index of `c` if it is a variation selector.
pub fn vs_index(c: char) -> Option<u16> {
    let cp = c as u32;
    match cp {
        VS_BASIC_START..=VS_BASIC_END => Some((cp - VS_BASIC_START) as u16),
        VS_SUPP_START..=VS_SUPP_END => Some((cp - VS_SUPP_START) as u16 + 16),
        _ => None,
    }
}

pub fn is_variation_selector(c: char) -> bool {
    vs_index(c).is_some()
}

// Default_Ignorable_Code_Point ranges, Unicode 15.1 DerivedCoreProperties.
// Contiguous runs collapsed; E0000..E0FFF covers tags, the supplementary
// variation selectors and the surrounding reserved block.
const DEFAULT_IGNORABLE: &[(u32, u32)] = &[
    (0x00AD, 0x00AD),
    (0x034F, 0x034F),
    (0x061C, 0x061C),
    (0x115F, 0x1160),
    (0x17B4, 0x17B5),
    (0x180B, 0x180F),
    (0x200B, 0x200F),
    (0x202A, 0x202E),
    (0x2060, 0x206F),
    (0x3164, 0x3164),
    (0xFE00, 0xFE0F),
    (0xFEFF, 0xFEFF),
    (0xFFA0, 0xFFA0),
    (0xFFF0, 0xFFF8),
    (0x1BCA0, 0x1BCA3),
    (0x1D173, 0x1D17A),
    (0xE0000, 0xE0FFF),
];

/// True for scalars invisible by default (format controls, fillers,
/// variation selectors, tag characters and their reserved neighbourhoods).
pub fn is_default_ignorable(c: char) -> bool {
    let cp = c as u32;
    DEFAULT_IGNORABLE
        .iter()
        .any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_vs_order() {
        assert_eq!(vs_scalar(0), '\u{FE00}');
        assert_eq!(vs_scalar(15), '\u{FE0F}');
        assert_eq!(vs_scalar(16), '\u{E0100}');
        assert_eq!(vs_scalar(255), '\u{E01EF}');
    }

    #[test]
    fn vs_index_round_trips() {
        for k in 0..VS_TOTAL {
            assert_eq!(vs_index(vs_scalar(k)), Some(k));
        }
        assert_eq!(vs_index('a'), None);
        assert_eq!(vs_index('\u{FDFF}'), None);
        assert_eq!(vs_index('\u{E01F0}'), None);
    }

    #[test]
    fn default_ignorable_members() {
        for c in ['\u{00AD}', '\u{200B}', '\u{200D}', '\u{FEFF}', '\u{2060}'] {
            assert!(is_default_ignorable(c), "{c:?} should be ignorable");
        }
        // Mongolian free variation selectors are ignorable but are not part
        // of the canonical 256-selector alphabet.
        assert!(is_default_ignorable('\u{180B}'));
        assert!(!is_variation_selector('\u{180B}'));
        // Every canonical VS is default-ignorable.
        for k in [0, 15, 16, 255] {
            assert!(is_default_ignorable(vs_scalar(k)));
        }
    }

    #[test]
    fn default_ignorable_non_members() {
        for c in ['a', ' ', '\n', '中', '🙂', '\u{00A0}', '\u{FFF9}'] {
            assert!(!is_default_ignorable(c), "{c:?} should not be ignorable");
        }
    }
}
