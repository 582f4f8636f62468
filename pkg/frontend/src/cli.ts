/** Exporter CLI: `export-weights` and `generate-fixtures`. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { generateFixtures } from "./fixtures.js";
import { ExportError, FetchError, exportWeights } from "./weights.js";

async function main() {
  await yargs(hideBin(process.argv))
    .command(
      "export-weights",
      "write a VGG-19 weight bank in the manifest+blob format",
      (y) =>
        y
          .option("source", {
            type: "string",
            demandOption: true,
            describe: "synthetic:<seed> or tfjs:<model.json url>",
          })
          .option("out", { type: "string", demandOption: true }),
      async (argv) => {
        const manifest = await exportWeights(argv.source, argv.out);
        console.log(manifest);
      },
    )
    .command(
      "generate-fixtures",
      "run the reference forward pass and write the golden fixture bundle",
      (y) =>
        y
          .option("weights", {
            type: "string",
            demandOption: true,
            describe: "path to an exported manifest.json",
          })
          .option("out", { type: "string", demandOption: true })
          .option("seed", { type: "number", default: 0, describe: "fixture image seed" }),
      async (argv) => {
        const manifest = await generateFixtures(argv.weights, argv.out, argv.seed, (m) =>
          console.error(m),
        );
        console.log(manifest);
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      if (err instanceof FetchError) {
        console.error(`fetch error: ${err.message}`);
        process.exit(3);
      }
      if (err instanceof ExportError) {
        console.error(`export error: ${err.message}`);
        process.exit(4);
      }
      console.error(msg ?? err?.message ?? "unknown error");
      process.exit(2);
    })
    .parseAsync();
}

main();
