/**
 * psm-exporter CLI: `export --spec <spec.json>` dumps per-layer features,
 * labels, optional posteriors and a manifest for the scoring engine.
 */

import { loadExportSpec, runExport } from "./export.js";

function fail(message: string): never {
  process.stderr.write(`error: ${message}\n`);
  process.exit(1);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "export") {
    process.stderr.write("usage: psm-exporter export --spec <spec.json>\n");
    return 2;
  }
  const specFlag = rest.indexOf("--spec");
  if (specFlag === -1 || specFlag + 1 >= rest.length) {
    process.stderr.write("usage: psm-exporter export --spec <spec.json>\n");
    return 2;
  }
  try {
    const { spec, baseDir } = loadExportSpec(rest[specFlag + 1]);
    const result = runExport(spec, baseDir);
    process.stdout.write(
      `exported ${result.candidateIds.length} candidates ` +
      `(${result.featureFiles} feature files, ${result.posteriorFiles} posterior files)\n` +
      `manifest: ${result.manifestPath}\n`);
    return 0;
  } catch (err) {
    fail(err instanceof Error ? err.message : String(err));
  }
}

process.exit(main(process.argv.slice(2)));
