"""Print the locations of the bundled demo files, for use from the shell."""
from . import demo_manifest, demo_policy, demo_query, demo_structures

if __name__ == "__main__":
    print("manifest:   %s" % demo_manifest())
    print("query:      %s" % demo_query())
    print("structures: %s" % demo_structures())
    print("policy:     %s" % demo_policy())
