import json
import sys

import jsonschema

schema_path, manifest_path = sys.argv[1], sys.argv[2]
with open(schema_path) as f:
    schema = json.load(f)
with open(manifest_path) as f:
    manifest = json.load(f)
jsonschema.Draft202012Validator.check_schema(schema)
jsonschema.Draft202012Validator(schema).validate(manifest)
print("ok", manifest_path)
