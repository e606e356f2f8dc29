"""Checks sample documents against the published schemas and `qspec validate`."""

import json
import pathlib
import subprocess
import sys

try:
    import jsonschema
    from referencing import Registry, Resource
except ImportError:
    jsonschema = None


def registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resource = Resource.from_contents(doc)
        resources.append((doc["$id"], resource))
        resources.append((path.name, resource))
    return Registry().with_resources(resources)


def main():
    qspec, schema_dir, sample_dir = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    reg = registry(schema_dir) if jsonschema else None
    failures = 0
    for expect_valid in (True, False):
        for path in sorted((sample_dir / ("valid" if expect_valid else "invalid")).glob("*.json")):
            schema_name = path.name.split(".")[0]
            notes = []
            if jsonschema:
                schema = json.loads((schema_dir / f"{schema_name}.schema.json").read_text())
                validator = jsonschema.Draft202012Validator(schema, registry=reg)
                errors = list(validator.iter_errors(json.loads(path.read_text())))
                if bool(errors) == expect_valid:
                    notes.append("schema " + ("rejected: " + errors[0].message if errors else "accepted"))
            run = subprocess.run([qspec, "validate", "--in", str(path)], capture_output=True, text=True)
            if (run.returncode == 0) != expect_valid:
                notes.append(f"qspec validate exit {run.returncode}: {run.stdout.strip()}")
            status = "ok" if not notes else "MISMATCH"
            print(f"{status} {path.parent.name}/{path.name}" + "".join("\n    " + n for n in notes))
            failures += bool(notes)
    if not jsonschema:
        print("jsonschema not installed; schema checks skipped")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
