export {
  FormatError,
  GenerationError,
  ModelLoadError,
  SpecialistUnavailable,
  TokenMapError,
  ZeroVectorError,
} from './errors.js';
export { makeRaster, drawRect, saveRaster, loadRaster, renderCrop } from './image.js';
export type { Raster } from './image.js';
export {
  encodeAttentionDump,
  writeAttentionDump,
  readAttentionDump,
  writeEmbeddings,
  readEmbeddings,
} from './formats.js';
export type { AttentionDumpFile, DumpGeometry, EmbeddingFile } from './formats.js';
export { GENERIC_INSTRUCTION, StubModel } from './stubModel.js';
export type { StubModelOptions, PlantedAttention } from './stubModel.js';
export { dumpAttention } from './attentionDump.js';
export type { DumpAttentionOptions } from './attentionDump.js';
export { segmentWords, writeWordBoxes } from './textSegmenter.js';
export type { WordRecord, SegmentOptions } from './textSegmenter.js';
export { DEFAULT_DIM, embedText, embedTexts, dumpEmbeddings } from './embedder.js';
export type { DumpEmbeddingsResult } from './embedder.js';
export { parseCropPlan, readCropPlan } from './cropPlan.js';
export type { CropPlan } from './cropPlan.js';
export { loadTemplates, getTemplate, renderTemplate } from './prompts.js';
export { renderPlanCrop, generateAugmented, EchoBackend } from './augment.js';
export type { PromptPart, GenerationBackend, AugmentedResult } from './augment.js';
export { main } from './cli.js';
