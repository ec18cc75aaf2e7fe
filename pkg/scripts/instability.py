"""Package instability metric over the input classes.

For every package that contains an input class or is imported by one,
count efferent couplings Ce (imports leaving the package) and afferent
couplings Ca (imports arriving), then report I = Ce / (Ce + Ca), or 1
when the package has no couplings at all.
"""

import _lib


def main():
    req = _lib.read_request()
    ast = _lib.Ast(req["astSummary"])

    efferent = {}
    afferent = {}
    packages = set()
    for rec in req["input"]:
        for ref in _lib.node_refs(rec):
            if ref not in ast.rows or ast.kind(ref) != "Class":
                continue
            package = ast.package_of(ref)
            packages.add(package)
            for imp in ast.children_of_kind(ref, "NameImport"):
                imported = ast.name(imp)
                target = imported.rsplit(".", 1)[0] if "." in imported else ""
                if not target or target == package:
                    continue
                packages.add(target)
                efferent[package] = efferent.get(package, 0) + 1
                afferent[target] = afferent.get(target, 0) + 1

    output = []
    for package in sorted(packages):
        e = efferent.get(package, 0)
        a = afferent.get(package, 0)
        i = e / (e + a) if e + a > 0 else 1.0
        output.append(
            _lib.record(
                "package",
                [
                    _lib.element("package", "string", package),
                    _lib.element("instability", "real", i),
                ],
            )
        )
    _lib.respond(output)


if __name__ == "__main__":
    main()
