// Explicit instantiations for one kernel namespace. Include inside the
// namespace block and invoke once per scalar type.
#define TGN_INSTANTIATE_KERNELS(S)                                             \
  template void add<S>(const S*, const S*, S*, std::size_t);                   \
  template void mul<S>(const S*, const S*, S*, std::size_t);                   \
  template void axpy<S>(S, const S*, S*, std::size_t);                         \
  template void scale<S>(const S*, S*, S, std::size_t);                        \
  template void relu_fwd<S>(const S*, S*, std::size_t);                        \
  template void relu_bwd<S>(const S*, const S*, S*, std::size_t);              \
  template void graph_mix_fwd<S>(const S*, const S*, S*, std::size_t,          \
                                 std::size_t);                                 \
  template void graph_mix_bwd_adj<S>(const S*, const S*, S*, std::size_t,      \
                                     std::size_t);                             \
  template void transpose2d<S>(const S*, S*, std::size_t, std::size_t);        \
  template void temporal_conv_fwd<S>(const S*, const S*, const S*, S*,         \
                                     std::size_t, std::size_t, std::size_t,    \
                                     std::size_t, std::size_t, std::size_t,    \
                                     std::size_t, std::size_t);                \
  template void temporal_conv_bwd_x<S>(const S*, const S*, S*, std::size_t,    \
                                       std::size_t, std::size_t, std::size_t,  \
                                       std::size_t, std::size_t, std::size_t,  \
                                       std::size_t);                           \
  template void temporal_conv_bwd_w<S>(const S*, const S*, S*, std::size_t,    \
                                       std::size_t, std::size_t, std::size_t,  \
                                       std::size_t, std::size_t, std::size_t,  \
                                       std::size_t);                           \
  template void temporal_conv_bwd_b<S>(const S*, S*, std::size_t, std::size_t, \
                                       std::size_t, std::size_t);              \
  template void bn_stats<S>(const S*, S*, S*, std::size_t, std::size_t,        \
                            std::size_t, std::size_t);                         \
  template void bn_apply<S>(const S*, const S*, const S*, const S*, const S*,  \
                            S, S*, std::size_t, std::size_t, std::size_t,      \
                            std::size_t);                                      \
  template void bn_bwd_train<S>(const S*, const S*, const S*, const S*,        \
                                const S*, S, S*, S*, S*, std::size_t,          \
                                std::size_t, std::size_t, std::size_t);        \
  template void bn_bwd_eval<S>(const S*, const S*, const S*, const S*,         \
                               const S*, S, S*, S*, S*, std::size_t,           \
                               std::size_t, std::size_t, std::size_t);         \
  template void gap_fwd<S>(const S*, S*, std::size_t, std::size_t,             \
                           std::size_t);                                       \
  template void gap_bwd<S>(const S*, S*, std::size_t, std::size_t,             \
                           std::size_t);                                       \
  template void linear_fwd<S>(const S*, const S*, const S*, S*, std::size_t,   \
                              std::size_t, std::size_t);                       \
  template void linear_bwd_x<S>(const S*, const S*, S*, std::size_t,           \
                                std::size_t, std::size_t);                     \
  template void linear_bwd_w<S>(const S*, const S*, S*, std::size_t,           \
                                std::size_t, std::size_t);                     \
  template void linear_bwd_b<S>(const S*, S*, std::size_t, std::size_t);       \
  template void softmax_fwd<S>(const S*, S*, std::size_t, std::size_t);        \
  template void softmax_bwd<S>(const S*, const S*, S*, std::size_t,            \
                               std::size_t);                                   \
  template void gather_cols_fwd<S>(const S*, S*, std::size_t, std::size_t,     \
                                   const std::size_t*, std::size_t);           \
  template void gather_cols_bwd<S>(const S*, S*, std::size_t, std::size_t,     \
                                   const std::size_t*, std::size_t);           \
  template void fold_persons_fwd<S>(const S*, S*, std::size_t, std::size_t,    \
                                    std::size_t, std::size_t, std::size_t);    \
  template void fold_persons_bwd<S>(const S*, S*, std::size_t, std::size_t,    \
                                    std::size_t, std::size_t, std::size_t);    \
  template void person_mean_fwd<S>(const S*, S*, std::size_t, std::size_t,     \
                                   std::size_t);                               \
  template void person_mean_bwd<S>(const S*, S*, std::size_t, std::size_t,     \
                                   std::size_t);
