/** Error taxonomy for the model-side adapter. */

export class ModelLoadError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ModelLoadError';
  }
}

/** The image-token span cannot be identified for this model. */
export class TokenMapError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'TokenMapError';
  }
}

export class SpecialistUnavailable extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'SpecialistUnavailable';
  }
}

export class GenerationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'GenerationError';
  }
}

/** A file on disk does not match the format it claims to be. */
export class FormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'FormatError';
  }
}

/** A text has no embeddable content (would produce the zero vector). */
export class ZeroVectorError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ZeroVectorError';
  }
}
