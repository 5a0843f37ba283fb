//! Annotation parsing, the record format, and submission files.

use rotkit::dota_io::{
    class_id, dota_v1_classes, parse_annotation, read_records, read_submission, write_records, write_submission, Dataset,
    ImageRecord,
};
use rotkit::postprocess::Detection;

const ANNOTATION: &str = "imagesource:GoogleEarth
gsd:0.146
924 307 1002 302 1005 353 927 358 plane 0
1021 1131 1055 1113 1073 1147 1039 1165 small-vehicle 1
";

fn main() -> rotkit::Result<()> {
    let ann = parse_annotation("P0001", ANNOTATION)?;
    for o in &ann.objects {
        println!("{} difficult={} y-up quad {:?}", o.class_name, o.difficult, o.quad.coords());
    }

    let mut classes = dota_v1_classes();
    let ds = Dataset {
        images: vec![ImageRecord::from_annotation(&ann, 1200, 1200, &mut classes)],
        classes,
    };
    let text = write_records(&ds)?;
    print!("{text}");
    assert_eq!(read_records("memory", &text)?, ds);

    let mut names = ds.classes.clone();
    let dets: Vec<Detection> = ann
        .objects
        .iter()
        .zip([0.98765, 0.5])
        .map(|(o, score)| Detection::new("P0001", o.quad, class_id(&mut names, &o.class_name), score))
        .collect::<rotkit::Result<_>>()?;
    let docs = write_submission(&dets, &ds.classes)?;
    for (name, body) in docs.iter().filter(|d| !d.1.is_empty()) {
        print!("{name}:\n{body}");
    }
    println!("read back {} detections", read_submission(&docs, &mut names)?.len());
    Ok(())
}
