export { parseBerCsv, BerRow, CSV_HEADER } from "./csv";
export { parseResidualReport, ResidualReport, NormalityInfo } from "./report";
export { renderBerFigure, Curve, BER_FLOOR } from "./ber";
export { renderHistFigure, sampleStats, HIST_BINS } from "./hist";
