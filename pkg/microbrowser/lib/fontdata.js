// 8x16 monospace bitmap font, ASCII 32-126. One hex string per glyph,
// 16 bytes top to bottom, MSB = leftmost pixel.
'use strict';

const REGULAR = [
  '00000000000000000000000000000000',
  '00000018181818180800001818000000',
  '00000034343434000000000000000000',
  '0000001a12127f3424ff2c6848000000',
  '000008083c6a68683c0a0b4a3e080800',
  '00000070d8d8730c304e09090f000000',
  '0000003c2020307059cdc7673f000000',
  '00000018181818000000000000000000',
  '00000408081810101010180808040000',
  '000010101808080c0c08081810100000',
  '000000086a3c3c6a0800000000000000',
  '0000000000080808ff08080800000000',
  '00000000000000000000001818181000',
  '0000000000000000003c000000000000',
  '00000000000000000000001818000000',
  '0000000206040c081818103020604000',
  '0000003c266263435b6362263c000000',
  '0000001828080808080808083f000000',
  '0000003c460206060c1830607e000000',
  '0000003c4602061c060202463c000000',
  '0000000e0e163626467f060606000000',
  '0000007e60607c46020202463c000000',
  '0000001c3260407c666363663c000000',
  '0000007e0206040c0c08181030000000',
  '0000003c6662663c664343663c000000',
  '0000003c664243673f0202063c000000',
  '00000000000018180000001818000000',
  '00000000000018180000001818181000',
  '0000000000030e78e0780e0300000000',
  '000000000000ff0000ff000000000000',
  '000000000040781e031e784000000000',
  '0000003c2602060c1818001818000000',
  '0000001e6341cf9b91919bcf40301e00',
  '000000181c343426267e4343c1000000',
  '0000007c6662667c626363637e000000',
  '0000001e32606060606060321e000000',
  '0000007c46424343434342467c000000',
  '0000007f6060607e606060607f000000',
  '0000007f6060607e6060606060000000',
  '0000001e32604040474363331e000000',
  '000000434343437f4343434343000000',
  '0000007e18181818181818187e000000',
  '0000003e060606060606064c78000000',
  '00000043464c5878684c464243000000',
  '0000006060606060606060607f000000',
  '000000e3e7e7d7dbdbc3c3c3c3000000',
  '000000636373535b4b4f474747000000',
  '0000003c66624343434362663c000000',
  '0000007e636363637e60606060000000',
  '0000003c66624343434362663c060200',
  '0000007c464242467c46424341000000',
  '0000003c624060381e0203463c000000',
  '000000ff181818181818181818000000',
  '0000006363636363636362663c000000',
  '000000c34362622626341c1c18000000',
  '000000c1c1c1d95b5f77766666000000',
  '0000004362361c181c342662c3000000',
  '000000c36226341c1818181818000000',
  '0000007f03060c0c181030607f000000',
  '00001c181818181818181818181c0000',
  '00000040602030101818080c04060200',
  '00003808080808080808080808380000',
  '000000183c2643000000000000000000',
  '000000000000000000000000000000ff',
  '00301008000000000000000000000000',
  '00000000003c66023e6242663a000000',
  '00006060607c6663636363667c000000',
  '00000000001e3260606060321e000000',
  '00000202023e6642424242663e000000',
  '00000000003c62437f4060623e000000',
  '00000e18187e18181818181818000000',
  '00000000003e6662424262663e02263c',
  '00006060607c66626262626262000000',
  '0000080800380808080808087f000000',
  '00000808003808080808080808080878',
  '0000606060626468786c666263000000',
  '0000701010101010101018180e000000',
  '00000000007e5b4b4b4b4b4b4b000000',
  '00000000007c66626262626262000000',
  '00000000003c6662434362663c000000',
  '00000000007c6662636363667c606060',
  '00000000003e6662424262663e020202',
  '00000000003f38303030303030000000',
  '00000000003c2260380e02663c000000',
  '00000010107e1010101010180e000000',
  '0000000000626262626262663a000000',
  '000000000043626626343c1c18000000',
  '000000000081c1d95b5f767626000000',
  '000000000062263c181c346643000000',
  '000000000043622226341c1c18181070',
  '00000000007e0604081830607e000000',
  '00000e08080818187018180808080e00',
  '00000808080808080808080808080808',
  '00007018181818080e08181818187000',
  '0000000000000000790e000000000000',
];

const BOLD = [
  '00000000000000000000000000000000',
  '00000018181818181818001818000000',
  '00000066666666000000000000000000',
  '0000001b1b127f3634ff6c6c68000000',
  '000008083e7a687c1e0e4f6e3c080800',
  '00000070d8d8730c30470d0d07000000',
  '0000003c3070307879cfcf673f000000',
  '00000018181818000000000000000000',
  '00000c0c18181818181818180c0c0000',
  '00003018181c0c0c0c0c1c1818300000',
  '000000187a3e3e7a1800000000000000',
  '00000000181818ffff18181800000000',
  '00000000000000000000181818300000',
  '00000000000000003c3c000000000000',
  '00000000000000000000181818000000',
  '0000000306060c0c0818103030606000',
  '0000003c7666677f7f6766763c000000',
  '0000003c7c1c1c1c1c1c1c1c7f000000',
  '0000003c4606060e0c1838707e000000',
  '0000003c4606061c060707463c000000',
  '0000000e1e1e3666667f060606000000',
  '0000007e60607c46060706463c000000',
  '0000001e32607e76636363763c000000',
  '0000007e06060e0c1c18183830000000',
  '0000003c6666663c666363663c000000',
  '0000003c66666767673f06463c000000',
  '00000000000018181800181818000000',
  '00000000000018181800181818100000',
  '0000000000030f7ce07c0f0300000000',
  '0000000000ffff0000ffff0000000000',
  '000000000040781e071e784000000000',
  '0000003c26060e1c1818001818000000',
  '0000003e6343cfdbd3d3dbcf40731f00',
  '0000001c3c3c3e36767e6363c3000000',
  '0000007e6667667e676363677e000000',
  '0000001e30706060606070301e000000',
  '0000007c66676763636767667c000000',
  '0000007f6060607e606060607f000000',
  '0000007f6060607e6060606060000000',
  '0000001e306060606f6363331f000000',
  '000000676767677f6767676767000000',
  '0000007e18181818181818187e000000',
  '0000003e060606060606064e7c000000',
  '00000067666c7c787c6e666763000000',
  '0000007070707070707070707f000000',
  '000000e7f7f7ffdfdbc3c3c3c3000000',
  '000000637373737b6b6f6f6767000000',
  '0000003c76676363636367763c000000',
  '0000007e676363677e60606060000000',
  '0000003c76676363636367763e060200',
  '0000007c666767667c6e666763000000',
  '0000003c6260707c1e0707463c000000',
  '000000ff181818181818181818000000',
  '0000006363636363636363663e000000',
  '000000e363676676363e3c3c1c000000',
  '000000c3c3c3dbdf7f7f777766000000',
  '000000e3663e3c1c1c3c3666e3000000',
  '000000e367763e3c1c18181818000000',
  '0000007f070e0e1c3c3870707f000000',
  '00001c181818181818181818181c0000',
  '000000606030301018080c0c06060300',
  '00003c0c0c0c0c0c0c0c0c0c0c3c0000',
  '0000001c3c7663000000000000000000',
  '000000000000000000000000000000ff',
  '00303018000000000000000000000000',
  '00000000003e66073f6767673f000000',
  '00006060607e7663636363767e000000',
  '00000000001e3270606070321e000000',
  '00000707073f6767676767673f000000',
  '00000000003c66637f6060733e000000',
  '00000f18187f18181818181818000000',
  '00000000003f6767676767673f07463c',
  '00006060607e76666666666666000000',
  '00001c1c007c1c1c1c1c1c1c7f000000',
  '00000c0c003c0c0c0c0c0c0c0c0c1c78',
  '0000606060676e7c7c7c6e6663000000',
  '0000f81818181818181818181f000000',
  '0000000000fedbdbdbdbdbdbdb000000',
  '00000000007e76666666666666000000',
  '00000000003c6667636367663c000000',
  '00000000007e7663636363767e606060',
  '00000000003f6767676767673f070707',
  '00000000003f39303030303030000000',
  '00000000003c62707c3e06463c000000',
  '00000018187e1818181818181e000000',
  '0000000000666666666666663e000000',
  '000000000063676676363c3c1c000000',
  '0000000000c1c3dbdb7f7f7676000000',
  '000000000067363c1c1c3c7667000000',
  '0000000000e36766363e3c1c1c181870',
  '00000000007f060e1c3838707f000000',
  '00000e1c1818181870181818181c0e00',
  '00001818181818181818181818181818',
  '000078181818181c0e1c181818187800',
  '0000000000000079ff0e000000000000',
];

module.exports = { REGULAR, BOLD };
