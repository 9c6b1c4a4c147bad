use hopfcurl_core::atlas::explicit_atlas;
use hopfcurl_core::exact::int;
use hopfcurl_core::FrameField;

/// A fixed combination of explicit eigenfields from every atlas entry.
pub fn sample_field() -> FrameField {
    let mut f = FrameField::zero();
    for entry in explicit_atlas().values() {
        for (i, g) in entry.fields.iter().enumerate() {
            f = &f + &g.scale(&int(i as i64 % 3 - 1));
        }
    }
    f
}
